#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace emrec {

enum class SensorPosition { kChest, kThigh };

// The two lying-activity classes. Stored as 0/1 in annotation files.
enum class Label : int { kLyingNoEm = 0, kLyingEm = 1 };

constexpr int kNumClasses = 2;

inline int label_index(Label l) { return static_cast<int>(l); }

struct SensorSample {
  double timestamp_s = 0.0;  // seconds since recording origin, non-negative
  double x = 0.0;            // acceleration in g units
  double y = 0.0;
  double z = 0.0;
};

struct SensorRecording {
  SensorPosition position = SensorPosition::kChest;
  double sampling_rate_hz = 30.0;
  std::vector<SensorSample> samples;  // strictly increasing timestamps
};

// Equal-length per-axis sequences on a shared 1/fs grid.
struct TriaxialSeries {
  double fs_hz = 30.0;
  std::vector<double> x, y, z;

  std::size_t size() const { return x.size(); }
};

struct SyncedRecording {
  std::string patient_id;
  double sampling_rate_hz = 30.0;
  double origin_s = 0.0;  // absolute time of sample 0
  TriaxialSeries chest, thigh;  // equal length, identical timebase
};

struct AnnotationSet {
  std::string patient_id;
  // (minute index, label); minute indices unique.
  std::vector<std::pair<std::int64_t, Label>> labels;
};

struct LabeledMinute {
  std::int64_t minute_index = 0;
  Label label = Label::kLyingNoEm;
};

// Synced streams plus the minutes that are both annotated and complete.
struct LabeledRecording {
  std::string patient_id;
  double sampling_rate_hz = 30.0;
  double origin_s = 0.0;
  TriaxialSeries chest, thigh;
  std::vector<LabeledMinute> minutes;  // ascending minute_index
};

// One annotated minute: exactly round(60 * fs) samples per stream.
struct Epoch {
  std::string patient_id;
  std::int64_t minute_index = 0;
  TriaxialSeries chest, thigh;
  Label label = Label::kLyingNoEm;
};

// Half-overlapped sub-window of an epoch. offset_s is a multiple of
// window/2 and the segment lies fully inside its epoch.
struct Segment {
  std::string patient_id;
  std::int64_t minute_index = 0;
  double offset_s = 0.0;
  TriaxialSeries chest, thigh;
  Label label = Label::kLyingNoEm;  // inherited from the epoch
};

}  // namespace emrec
