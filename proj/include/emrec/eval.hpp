#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "emrec/pipeline.hpp"

namespace emrec {

struct Fold {
  std::vector<std::string> train_ids;
  std::string test_id;
};

// One fold per patient, ordered by patient id; needs at least 2 patients.
std::vector<Fold> lopo_folds(std::vector<std::string> patient_ids);

struct EvalReport {
  std::vector<std::pair<std::string, double>> per_patient_accuracy;  // sorted by id
  double mean_accuracy = 0.0;
  double instability = 0.0;  // population std of the per-patient accuracies
  PipelineConfig config;
  int fold_count = 0;
};

// Leave-one-patient-out: per fold, trains on the other patients' segments
// and scores the held-out patient minute by minute via segment voting.
// Train/test patient disjointness is asserted on every fold.
EvalReport evaluate(std::span<const LabeledRecording> data, const PipelineConfig& cfg,
                    int jobs = 1);

struct AblationRow {
  std::string label;
  EvalReport report;
};

std::vector<AblationRow> ablate_windows(std::span<const LabeledRecording> data,
                                        const PipelineConfig& base,
                                        std::span<const double> windows = kSupportedWindowsS,
                                        int jobs = 1);

std::vector<AblationRow> ablate_sensors(std::span<const LabeledRecording> data,
                                        const PipelineConfig& base, int jobs = 1);

// Rows for k = k_start..n patients. Every size-k subset is evaluated when
// there are at most 56 subsets; otherwise 30 distinct seeded random subsets.
// A row reports the mean of the subset LOPO means and instabilities.
std::vector<AblationRow> ablate_patient_count(std::span<const LabeledRecording> data,
                                              const PipelineConfig& base, int k_start = 5,
                                              int jobs = 1);

// Orientation-insensitive magnitude features vs. the comparator layout that
// appends raw per-axis metrics.
std::vector<AblationRow> compare_feature_sets(std::span<const LabeledRecording> data,
                                              const PipelineConfig& base, int jobs = 1);

// Machine CSV: `config,patient_id,accuracy` rows plus `mean`/`instability`
// summary rows per config.
void write_report_csv(std::ostream& out, std::span<const AblationRow> rows);

// Aligned human-readable table.
void write_report_table(std::ostream& out, std::span<const AblationRow> rows);

}  // namespace emrec
