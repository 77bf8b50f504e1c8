#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "emrec/features.hpp"
#include "emrec/model.hpp"
#include "emrec/types.hpp"

namespace emrec {

// Window sizes with ablation parity; other values work but the CLI warns.
inline constexpr double kSupportedWindowsS[] = {4.0, 10.0, 20.0, 30.0, 60.0};

struct PipelineConfig {
  double window_s = 10.0;
  SensorSubset sensors = SensorSubset::kBoth;
  bool per_axis_comparator = false;  // evaluation harness layout only
  TrainConfig train;
  std::uint64_t seed = 0;

  FeatureLayout layout() const { return {sensors, per_axis_comparator}; }
};

struct MinutePrediction {
  std::string patient_id;
  std::int64_t minute_index = 0;
  int predicted = 0;
  std::array<std::int64_t, 2> segment_votes{0, 0};
  double mean_score = 0.0;  // mean class-1 score over the minute's segments
};

// One featurized segment row; `patient` indexes FeatureTable::patients.
struct SegmentInfo {
  std::uint32_t patient = 0;
  std::int64_t minute_index = 0;
  double offset_s = 0.0;
};

// All segments of a dataset featurized once; evaluation folds slice this
// table instead of re-featurizing per fold.
struct FeatureTable {
  std::size_t d = 0;
  std::vector<double> values;  // rows() x d, row-major
  std::vector<int> labels;
  std::vector<SegmentInfo> info;
  std::vector<std::string> patients;

  std::size_t rows() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values).subspan(i * d, d);
  }
  Dataset dataset_view() const { return {values, labels, rows(), d}; }
};

FeatureTable featurize(std::span<const LabeledRecording> data, double window_s,
                       const FeatureLayout& layout, int jobs = 1);

// Epochs -> half-overlapped segments (inheriting the minute label) ->
// feature vectors -> bagged trees.
BaggingModel train_pipeline(std::span<const LabeledRecording> data, const PipelineConfig& cfg,
                            int jobs = 1);

// Majority vote over the minute's segment predictions. A vote tie resolves
// to the class with the higher mean segment score (class 1 iff the mean
// class-1 score exceeds 0.5), then to class 0.
MinutePrediction predict_minute(const BaggingModel& model, const Epoch& epoch,
                                const PipelineConfig& cfg);

// Vote aggregation shared by predict_minute and the evaluation fast path.
MinutePrediction vote_minute(std::span<const Prediction> segment_predictions,
                             std::string patient_id, std::int64_t minute_index);

// Model bundle on disk: the model document plus the pipeline settings needed
// to reapply it (window, sensor subset, comparator flag).
void save_pipeline_file(const std::filesystem::path& path, const BaggingModel& model,
                        const PipelineConfig& cfg);
std::pair<BaggingModel, PipelineConfig> load_pipeline_file(const std::filesystem::path& path);

}  // namespace emrec
