#include "emrec/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>

#include "emrec/error.hpp"
#include "emrec/rng.hpp"

namespace emrec {

std::vector<Fold> lopo_folds(std::vector<std::string> patient_ids) {
  std::sort(patient_ids.begin(), patient_ids.end());
  if (std::adjacent_find(patient_ids.begin(), patient_ids.end()) != patient_ids.end())
    throw DataError("duplicate patient id");
  if (patient_ids.size() < 2)
    throw DataError("leave-one-patient-out needs at least 2 patients");

  std::vector<Fold> folds;
  folds.reserve(patient_ids.size());
  for (const auto& test : patient_ids) {
    Fold fold;
    fold.test_id = test;
    for (const auto& id : patient_ids)
      if (id != test) fold.train_ids.push_back(id);
    folds.push_back(std::move(fold));
  }
  return folds;
}

namespace {

void guard_fold(const Fold& fold) {
  for (const auto& id : fold.train_ids)
    if (id == fold.test_id)
      throw DataError("fold leakage: '" + id + "' is in both train and test sets");
}

double population_std(std::span<const double> values, double mean) {
  if (values.empty()) return 0.0;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  return std::sqrt(var / static_cast<double>(values.size()));
}

// Runs the folds against a table featurized once for the configuration.
EvalReport evaluate_folds(const FeatureTable& table, const std::vector<Fold>& folds,
                          const PipelineConfig& cfg, int jobs) {
  std::map<std::string, std::uint32_t> patient_index;
  for (std::uint32_t i = 0; i < table.patients.size(); ++i) {
    if (!patient_index.emplace(table.patients[i], i).second)
      throw DataError("duplicate patient id '" + table.patients[i] + "'");
  }

  EvalReport report;
  report.config = cfg;
  report.fold_count = static_cast<int>(folds.size());

  for (const Fold& fold : folds) {
    guard_fold(fold);
    const auto test_it = patient_index.find(fold.test_id);
    if (test_it == patient_index.end())
      throw DataError("unknown test patient '" + fold.test_id + "'");
    const std::uint32_t test_patient = test_it->second;

    std::set<std::uint32_t> train_patients;
    for (const auto& id : fold.train_ids) {
      const auto it = patient_index.find(id);
      if (it == patient_index.end()) throw DataError("unknown train patient '" + id + "'");
      train_patients.insert(it->second);
    }

    std::vector<double> train_values;
    std::vector<int> train_labels;
    for (std::size_t i = 0; i < table.rows(); ++i) {
      if (!train_patients.count(table.info[i].patient)) continue;
      const auto row = table.row(i);
      train_values.insert(train_values.end(), row.begin(), row.end());
      train_labels.push_back(table.labels[i]);
    }
    if (train_labels.empty()) throw DataError("fold has no training minutes");

    const Dataset train_set{train_values, train_labels, train_labels.size(), table.d};
    const BaggingModel model =
        train_bagging(train_set, cfg.train, cfg.seed, feature_digest(cfg.layout()),
                      feature_names(cfg.layout()), jobs);

    // Test rows are contiguous per minute: featurize emits them patient-major
    // in minute order with ascending offsets.
    std::size_t correct = 0, minutes = 0;
    std::size_t i = 0;
    while (i < table.rows()) {
      if (table.info[i].patient != test_patient) {
        ++i;
        continue;
      }
      const std::int64_t minute = table.info[i].minute_index;
      const int truth = table.labels[i];
      std::vector<Prediction> predictions;
      while (i < table.rows() && table.info[i].patient == test_patient &&
             table.info[i].minute_index == minute) {
        predictions.push_back(model.predict(table.row(i)));
        ++i;
      }
      const MinutePrediction vote = vote_minute(predictions, fold.test_id, minute);
      correct += (vote.predicted == truth) ? 1 : 0;
      ++minutes;
    }
    if (minutes == 0) throw DataError("patient '" + fold.test_id + "' has no labeled minutes");
    report.per_patient_accuracy.emplace_back(
        fold.test_id, static_cast<double>(correct) / static_cast<double>(minutes));
  }

  std::vector<double> accuracies;
  accuracies.reserve(report.per_patient_accuracy.size());
  double sum = 0.0;
  for (const auto& [id, acc] : report.per_patient_accuracy) {
    accuracies.push_back(acc);
    sum += acc;
  }
  report.mean_accuracy = sum / static_cast<double>(accuracies.size());
  report.instability = population_std(accuracies, report.mean_accuracy);
  return report;
}

std::vector<std::string> patient_ids_of(std::span<const LabeledRecording> data) {
  std::vector<std::string> ids;
  ids.reserve(data.size());
  for (const auto& rec : data) ids.push_back(rec.patient_id);
  return ids;
}

}  // namespace

EvalReport evaluate(std::span<const LabeledRecording> data, const PipelineConfig& cfg,
                    int jobs) {
  for (const auto& rec : data)
    if (rec.minutes.empty())
      throw DataError("patient '" + rec.patient_id + "' has no labeled minutes");
  const FeatureTable table = featurize(data, cfg.window_s, cfg.layout(), jobs);
  return evaluate_folds(table, lopo_folds(patient_ids_of(data)), cfg, jobs);
}

std::vector<AblationRow> ablate_windows(std::span<const LabeledRecording> data,
                                        const PipelineConfig& base,
                                        std::span<const double> windows, int jobs) {
  std::vector<AblationRow> rows;
  for (double w : windows) {
    PipelineConfig cfg = base;
    cfg.window_s = w;
    char label[32];
    std::snprintf(label, sizeof(label), "window_%gs", w);
    rows.push_back({label, evaluate(data, cfg, jobs)});
  }
  return rows;
}

std::vector<AblationRow> ablate_sensors(std::span<const LabeledRecording> data,
                                        const PipelineConfig& base, int jobs) {
  std::vector<AblationRow> rows;
  const std::pair<SensorSubset, const char*> cells[] = {
      {SensorSubset::kChestOnly, "chest_only"},
      {SensorSubset::kThighOnly, "thigh_only"},
      {SensorSubset::kBoth, "both"},
  };
  for (const auto& [subset, label] : cells) {
    PipelineConfig cfg = base;
    cfg.sensors = subset;
    rows.push_back({label, evaluate(data, cfg, jobs)});
  }
  return rows;
}

namespace {

// Number of size-k subsets, saturating just above the enumeration cap.
std::uint64_t binomial_capped(std::uint64_t n, std::uint64_t k, std::uint64_t cap) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    result = result * (n - k + i) / i;
    if (result > cap) return cap + 1;
  }
  return result;
}

std::vector<std::vector<std::size_t>> all_subsets(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::size_t>> subsets;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  for (;;) {
    subsets.push_back(idx);
    // advance to the next combination in lexicographic order
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return subsets;
}

std::vector<std::vector<std::size_t>> random_subsets(std::size_t n, std::size_t k,
                                                     std::size_t count, Rng& rng) {
  std::set<std::vector<std::size_t>> seen;
  std::vector<std::vector<std::size_t>> subsets;
  std::vector<std::size_t> pool(n);
  while (subsets.size() < count) {
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    // partial Fisher-Yates, first k entries form the draw
    for (std::size_t i = 0; i < k; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.next_below(n - i));
      std::swap(pool[i], pool[j]);
    }
    std::vector<std::size_t> subset(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(subset.begin(), subset.end());
    if (seen.insert(subset).second) subsets.push_back(std::move(subset));
  }
  return subsets;
}

}  // namespace

std::vector<AblationRow> ablate_patient_count(std::span<const LabeledRecording> data,
                                              const PipelineConfig& base, int k_start,
                                              int jobs) {
  constexpr std::uint64_t kEnumerationCap = 56;
  constexpr std::size_t kRandomSubsets = 30;

  const std::size_t n = data.size();
  if (n < 2) throw DataError("patient-count ablation needs at least 2 patients");
  auto ids = patient_ids_of(data);
  std::sort(ids.begin(), ids.end());

  const FeatureTable table = featurize(data, base.window_s, base.layout(), jobs);

  std::vector<AblationRow> rows;
  const auto first_k = static_cast<std::size_t>(std::clamp(k_start, 2, static_cast<int>(n)));
  for (std::size_t k = first_k; k <= n; ++k) {
    std::vector<std::vector<std::size_t>> subsets;
    if (binomial_capped(n, k, kEnumerationCap) <= kEnumerationCap) {
      subsets = all_subsets(n, k);
    } else {
      Rng rng(stable_hash(base.seed, k));
      subsets = random_subsets(n, k, kRandomSubsets, rng);
    }

    double acc_sum = 0.0, inst_sum = 0.0;
    EvalReport last;
    for (const auto& subset : subsets) {
      std::vector<std::string> subset_ids;
      subset_ids.reserve(k);
      for (std::size_t i : subset) subset_ids.push_back(ids[i]);
      last = evaluate_folds(table, lopo_folds(subset_ids), base, jobs);
      acc_sum += last.mean_accuracy;
      inst_sum += last.instability;
    }

    AblationRow row;
    char label[32];
    std::snprintf(label, sizeof(label), "patients_%zu", k);
    row.label = label;
    row.report.config = base;
    row.report.fold_count = static_cast<int>(k);
    row.report.mean_accuracy = acc_sum / static_cast<double>(subsets.size());
    row.report.instability = inst_sum / static_cast<double>(subsets.size());
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<AblationRow> compare_feature_sets(std::span<const LabeledRecording> data,
                                              const PipelineConfig& base, int jobs) {
  std::vector<AblationRow> rows;
  for (const bool per_axis : {false, true}) {
    PipelineConfig cfg = base;
    cfg.per_axis_comparator = per_axis;
    char label[32];
    std::snprintf(label, sizeof(label), "%s_%zu", per_axis ? "per_axis" : "magnitude",
                  cfg.layout().size());
    rows.push_back({label, evaluate(data, cfg, jobs)});
  }
  return rows;
}

void write_report_csv(std::ostream& out, std::span<const AblationRow> rows) {
  char buf[64];
  out << "config,patient_id,accuracy\n";
  for (const auto& row : rows) {
    for (const auto& [id, acc] : row.report.per_patient_accuracy) {
      std::snprintf(buf, sizeof(buf), "%.6f", acc);
      out << row.label << ',' << id << ',' << buf << '\n';
    }
    std::snprintf(buf, sizeof(buf), "%.6f", row.report.mean_accuracy);
    out << row.label << ",mean," << buf << '\n';
    std::snprintf(buf, sizeof(buf), "%.6f", row.report.instability);
    out << row.label << ",instability," << buf << '\n';
  }
}

void write_report_table(std::ostream& out, std::span<const AblationRow> rows) {
  std::size_t width = 6;
  for (const auto& row : rows) width = std::max(width, row.label.size());
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%-*s  %12s  %12s  %5s\n", static_cast<int>(width),
                "config", "accuracy", "instability", "folds");
  out << buf;
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "%-*s  %12.4f  %12.4f  %5d\n", static_cast<int>(width),
                  row.label.c_str(), row.report.mean_accuracy, row.report.instability,
                  row.report.fold_count);
    out << buf;
  }
}

}  // namespace emrec
