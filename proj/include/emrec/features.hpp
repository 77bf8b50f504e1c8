#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "emrec/types.hpp"

namespace emrec {

struct MetricSet {
  double mean = 0.0;
  double max = 0.0;
  double min = 0.0;
  double std_dev = 0.0;  // population standard deviation
  double median = 0.0;
  double entropy = 0.0;  // bits, 16-equal-width-bin histogram over [min, max]
  double rms = 0.0;
  double iqr = 0.0;      // Q3 - Q1, linearly interpolated quantiles

  static constexpr int kCount = 8;
  std::array<double, kCount> as_array() const {
    return {mean, max, min, std_dev, median, entropy, rms, iqr};
  }
};

// Entropy of a constant series is defined as 0.
MetricSet metrics(std::span<const double> series);

enum class SensorSubset { kBoth, kChestOnly, kThighOnly };

const char* sensor_subset_name(SensorSubset s);

struct FeatureLayout {
  SensorSubset subset = SensorSubset::kBoth;
  // Appends the raw per-axis metric block. Only the evaluation harness uses
  // this comparator layout; production features are magnitude-based.
  bool per_axis = false;

  std::size_t size() const;
};

// Canonical frozen ordering: sensor (chest, thigh) x signal (raw_mag,
// low_mag, high_mag, dhigh_mag) x metric (mean, max, min, std, median,
// entropy, rms, iqr) = 64 names for the default layout. The per-axis block,
// when enabled, appends sensor x axis (x, y, z) x metric on the raw signals.
std::vector<std::string> feature_names(const FeatureLayout& layout = {});

// FNV-1a 64 over the newline-joined canonical name list. Models carry this
// digest and predictions verify it.
std::uint64_t feature_digest(const FeatureLayout& layout = {});
std::string feature_digest_hex(const FeatureLayout& layout = {});

// The feature vector of one segment in the layout's canonical order.
std::vector<double> segment_features(const Segment& seg, const FeatureLayout& layout = {});

}  // namespace emrec
