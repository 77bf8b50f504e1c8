#include "emrec/windowing.hpp"

#include <cmath>
#include <string>

#include "emrec/error.hpp"

namespace emrec {

namespace {

std::vector<double> slice(const std::vector<double>& v, std::size_t begin, std::size_t count) {
  return {v.begin() + static_cast<std::ptrdiff_t>(begin),
          v.begin() + static_cast<std::ptrdiff_t>(begin + count)};
}

TriaxialSeries slice_series(const TriaxialSeries& s, std::size_t begin, std::size_t count) {
  TriaxialSeries out;
  out.fs_hz = s.fs_hz;
  out.x = slice(s.x, begin, count);
  out.y = slice(s.y, begin, count);
  out.z = slice(s.z, begin, count);
  return out;
}

struct WindowGrid {
  std::size_t win_n = 0;   // samples per window
  std::size_t hop_n = 0;   // samples per hop; win_n - hop_n = overlap
};

WindowGrid window_grid(double window_s, double fs_hz) {
  if (!(window_s > 0.0) || window_s > 60.0)
    throw WindowError("window must lie in (0, 60] s, got " + std::to_string(window_s));
  const auto win_n = static_cast<std::size_t>(std::llround(window_s * fs_hz));
  if (win_n < 2) throw WindowError("window spans fewer than 2 samples");
  const auto overlap = static_cast<std::size_t>(std::llround(window_s * fs_hz / 2.0));
  return {win_n, win_n - overlap};
}

}  // namespace

std::size_t samples_per_minute(double fs_hz) {
  return static_cast<std::size_t>(std::llround(60.0 * fs_hz));
}

std::vector<Epoch> split_epochs(const LabeledRecording& rec) {
  const std::size_t spm = samples_per_minute(rec.sampling_rate_hz);
  std::vector<Epoch> epochs;
  epochs.reserve(rec.minutes.size());
  for (const auto& minute : rec.minutes) {
    const auto begin = static_cast<std::size_t>(minute.minute_index) * spm;
    Epoch e;
    e.patient_id = rec.patient_id;
    e.minute_index = minute.minute_index;
    e.label = minute.label;
    e.chest = slice_series(rec.chest, begin, spm);
    e.thigh = slice_series(rec.thigh, begin, spm);
    epochs.push_back(std::move(e));
  }
  return epochs;
}

std::size_t segment_count(std::size_t epoch_samples, double window_s, double fs_hz) {
  const WindowGrid g = window_grid(window_s, fs_hz);
  if (epoch_samples < g.win_n) return 0;
  return (epoch_samples - g.win_n) / g.hop_n + 1;
}

std::vector<Segment> segment_epoch(const Epoch& epoch, double window_s) {
  const double fs = epoch.chest.fs_hz;
  const WindowGrid g = window_grid(window_s, fs);
  const std::size_t n = epoch.chest.size();

  std::vector<Segment> segments;
  for (std::size_t k = 0; k * g.hop_n + g.win_n <= n; ++k) {
    const std::size_t begin = k * g.hop_n;
    Segment s;
    s.patient_id = epoch.patient_id;
    s.minute_index = epoch.minute_index;
    s.offset_s = static_cast<double>(k) * (window_s / 2.0);
    s.label = epoch.label;
    s.chest = slice_series(epoch.chest, begin, g.win_n);
    s.thigh = slice_series(epoch.thigh, begin, g.win_n);
    segments.push_back(std::move(s));
  }
  return segments;
}

}  // namespace emrec
