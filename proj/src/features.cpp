#include "emrec/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "emrec/dsp.hpp"
#include "emrec/error.hpp"

namespace emrec {

namespace {

constexpr int kHistogramBins = 16;

const char* const kMetricNames[MetricSet::kCount] = {
    "mean", "max", "min", "std", "median", "entropy", "rms", "iqr"};
const char* const kSignalNames[4] = {"raw_mag", "low_mag", "high_mag", "dhigh_mag"};
const char* const kAxisNames[3] = {"x", "y", "z"};

// Linear-interpolation quantile of an ascending series.
double quantile_sorted(const std::vector<double>& sorted, double q) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double pos = q * static_cast<double>(n - 1);
  const auto lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= n) return sorted[n - 1];
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double histogram_entropy_bits(std::span<const double> series, double lo, double hi) {
  if (hi == lo) return 0.0;
  std::array<std::size_t, kHistogramBins> counts{};
  const double scale = static_cast<double>(kHistogramBins) / (hi - lo);
  for (double v : series) {
    auto bin = static_cast<int>((v - lo) * scale);
    bin = std::clamp(bin, 0, kHistogramBins - 1);
    ++counts[static_cast<std::size_t>(bin)];
  }
  const double n = static_cast<double>(series.size());
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

}  // namespace

MetricSet metrics(std::span<const double> series) {
  if (series.empty()) throw LengthError("metrics of an empty series");
  const auto n = static_cast<double>(series.size());

  MetricSet m;
  double sum = 0.0, sum_sq = 0.0;
  m.max = m.min = series[0];
  for (double v : series) {
    sum += v;
    sum_sq += v * v;
    m.max = std::max(m.max, v);
    m.min = std::min(m.min, v);
  }
  m.mean = sum / n;

  double var = 0.0;
  for (double v : series) var += (v - m.mean) * (v - m.mean);
  m.std_dev = std::sqrt(var / n);
  m.rms = std::sqrt(sum_sq / n);

  std::vector<double> sorted(series.begin(), series.end());
  std::sort(sorted.begin(), sorted.end());
  m.median = quantile_sorted(sorted, 0.5);
  m.iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  m.entropy = histogram_entropy_bits(series, m.min, m.max);
  return m;
}

const char* sensor_subset_name(SensorSubset s) {
  switch (s) {
    case SensorSubset::kChestOnly: return "chest";
    case SensorSubset::kThighOnly: return "thigh";
    case SensorSubset::kBoth: return "both";
  }
  return "both";
}

std::size_t FeatureLayout::size() const {
  const std::size_t sensors = subset == SensorSubset::kBoth ? 2 : 1;
  std::size_t per_sensor = 4 * MetricSet::kCount;       // magnitude block
  if (per_axis) per_sensor += 3 * MetricSet::kCount;    // raw per-axis block
  return sensors * per_sensor;
}

namespace {

std::vector<const char*> layout_sensors(const FeatureLayout& layout) {
  switch (layout.subset) {
    case SensorSubset::kChestOnly: return {"chest"};
    case SensorSubset::kThighOnly: return {"thigh"};
    case SensorSubset::kBoth: return {"chest", "thigh"};
  }
  return {"chest", "thigh"};
}

}  // namespace

std::vector<std::string> feature_names(const FeatureLayout& layout) {
  std::vector<std::string> names;
  names.reserve(layout.size());
  for (const char* sensor : layout_sensors(layout))
    for (const char* signal : kSignalNames)
      for (const char* metric : kMetricNames)
        names.push_back(std::string(sensor) + "_" + signal + "_" + metric);
  if (layout.per_axis) {
    for (const char* sensor : layout_sensors(layout))
      for (const char* axis : kAxisNames)
        for (const char* metric : kMetricNames)
          names.push_back(std::string(sensor) + "_raw_" + axis + "_" + metric);
  }
  return names;
}

std::uint64_t feature_digest(const FeatureLayout& layout) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a 64 offset basis
  const auto mix = [&h](char c) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  };
  for (const auto& name : feature_names(layout)) {
    for (char c : name) mix(c);
    mix('\n');
  }
  return h;
}

std::string feature_digest_hex(const FeatureLayout& layout) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(feature_digest(layout)));
  return buf;
}

namespace {

void append_metrics(std::span<const double> series, std::vector<double>& out) {
  for (double v : metrics(series).as_array()) out.push_back(v);
}

// 32 magnitude attributes of one sensor stream: metrics of the magnitudes of
// the raw signal, the two bands, and the derivative of the high band.
void append_sensor_features(const TriaxialSeries& stream, std::vector<double>& out) {
  const BandDecomposition bands = band_split(stream);
  append_metrics(magnitude_series(stream), out);
  append_metrics(magnitude_series(bands.low), out);
  append_metrics(magnitude_series(bands.high), out);
  append_metrics(magnitude_series(derivative(bands.high)), out);
}

void append_axis_features(const TriaxialSeries& stream, std::vector<double>& out) {
  append_metrics(stream.x, out);
  append_metrics(stream.y, out);
  append_metrics(stream.z, out);
}

}  // namespace

std::vector<double> segment_features(const Segment& seg, const FeatureLayout& layout) {
  if (seg.chest.size() < 2 || seg.thigh.size() < 2)
    throw LengthError("segment must hold at least 2 samples per stream");

  std::vector<double> out;
  out.reserve(layout.size());
  if (layout.subset != SensorSubset::kThighOnly) append_sensor_features(seg.chest, out);
  if (layout.subset != SensorSubset::kChestOnly) append_sensor_features(seg.thigh, out);
  if (layout.per_axis) {
    if (layout.subset != SensorSubset::kThighOnly) append_axis_features(seg.chest, out);
    if (layout.subset != SensorSubset::kChestOnly) append_axis_features(seg.thigh, out);
  }
  return out;
}

}  // namespace emrec
