#pragma once

#include <cstddef>
#include <vector>

#include "emrec/types.hpp"

namespace emrec {

std::size_t samples_per_minute(double fs_hz);

// One epoch per labeled complete minute, in minute order.
std::vector<Epoch> split_epochs(const LabeledRecording& rec);

// Number of half-overlapped windows of `window_s` seconds that fit in an
// epoch of `epoch_samples`: floor((N - win) / hop) + 1 with hop = win/2,
// partial trailing windows dropped.
std::size_t segment_count(std::size_t epoch_samples, double window_s, double fs_hz);

// Half-overlap segmentation. window_s must lie in (0, 60] and span at least
// two samples; window_s = 60 yields the single whole-minute segment.
std::vector<Segment> segment_epoch(const Epoch& epoch, double window_s);

}  // namespace emrec
