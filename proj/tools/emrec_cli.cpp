#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "emrec/error.hpp"
#include "emrec/eval.hpp"
#include "emrec/features.hpp"
#include "emrec/ingest.hpp"
#include "emrec/pipeline.hpp"
#include "emrec/synth.hpp"
#include "emrec/windowing.hpp"

namespace {

using namespace emrec;

SensorSubset subset_from_flag(const std::string& s) {
  if (s == "chest") return SensorSubset::kChestOnly;
  if (s == "thigh") return SensorSubset::kThighOnly;
  return SensorSubset::kBoth;
}

void warn_if_unsupported_window(double window_s) {
  for (double w : kSupportedWindowsS)
    if (w == window_s) return;
  std::fprintf(stderr,
               "warning: window %g s is outside the ablation set {4, 10, 20, 30, 60}\n",
               window_s);
}

std::string config_label(const PipelineConfig& cfg) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "w%g_%s", cfg.window_s, sensor_subset_name(cfg.sensors));
  return buf;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

struct CommonOptions {
  std::string data_dir;
  double window_s = 10.0;
  std::string sensors = "both";
  std::uint64_t seed = 0;
  int jobs = 1;
  TrainConfig train;
  bool no_bootstrap = false;

  PipelineConfig pipeline() const {
    PipelineConfig cfg;
    cfg.window_s = window_s;
    cfg.sensors = subset_from_flag(sensors);
    cfg.seed = seed;
    cfg.train = train;
    cfg.train.bootstrap = !no_bootstrap;
    return cfg;
  }
};

void add_model_options(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--window", opt.window_s, "Segment window in seconds")
      ->default_val(10.0);
  cmd->add_option("--sensors", opt.sensors, "Sensor subset: both, chest, thigh")
      ->default_val("both")
      ->check(CLI::IsMember({"both", "chest", "thigh"}));
  cmd->add_option("--trees", opt.train.n_trees, "Number of bagged trees")->default_val(100);
  cmd->add_option("--max-depth", opt.train.max_depth, "Tree depth limit, -1 = unlimited")
      ->default_val(-1);
  cmd->add_option("--min-leaf", opt.train.min_samples_leaf, "Minimum samples per leaf")
      ->default_val(2);
  cmd->add_flag("--no-bootstrap", opt.no_bootstrap, "Train every tree on the full set");
  cmd->add_option("--seed", opt.seed, "Master seed")->default_val(0);
  cmd->add_option("--jobs", opt.jobs, "Worker threads; results do not depend on it")
      ->default_val(1);
}

int run_synth(const SynthConfig& cfg, const std::string& out_dir) {
  const auto patients = generate_dataset(cfg);
  write_dataset(out_dir, patients);
  std::size_t minutes = 0;
  for (const auto& p : patients) minutes += p.recording.minutes.size();
  std::printf("wrote %d patients, %zu labeled minutes to %s\n", cfg.n_patients, minutes,
              out_dir.c_str());
  return 0;
}

int run_features(const CommonOptions& opt, const std::string& out_path) {
  warn_if_unsupported_window(opt.window_s);
  const auto data = load_dataset(opt.data_dir);
  const PipelineConfig cfg = opt.pipeline();
  const FeatureTable table = featurize(data, cfg.window_s, cfg.layout(), opt.jobs);

  auto out = open_output(out_path);
  for (const auto& name : feature_names(cfg.layout())) out << name << ',';
  out << "patient_id,minute,offset_s,label\n";
  char buf[40];
  for (std::size_t i = 0; i < table.rows(); ++i) {
    for (double v : table.row(i)) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << buf << ',';
    }
    const SegmentInfo& info = table.info[i];
    std::snprintf(buf, sizeof(buf), "%g", info.offset_s);
    out << table.patients[info.patient] << ',' << info.minute_index << ',' << buf << ','
        << table.labels[i] << '\n';
  }
  std::printf("wrote %zu segment rows to %s\n", table.rows(), out_path.c_str());
  return 0;
}

int run_train(const CommonOptions& opt, const std::string& out_path) {
  warn_if_unsupported_window(opt.window_s);
  const auto data = load_dataset(opt.data_dir);
  const PipelineConfig cfg = opt.pipeline();
  const BaggingModel model = train_pipeline(data, cfg, opt.jobs);
  save_pipeline_file(out_path, model, cfg);
  std::printf("trained %d trees on %zu patients -> %s\n", model.config.n_trees, data.size(),
              out_path.c_str());
  return 0;
}

int run_predict(const std::string& model_path, const std::string& data_dir,
                const std::string& out_path) {
  const auto [model, cfg] = load_pipeline_file(model_path);
  const auto data = load_dataset(data_dir);

  auto out = open_output(out_path);
  out << "patient_id,minute,predicted,votes_0,votes_1,mean_score\n";
  char buf[40];
  std::size_t minutes = 0;
  for (const auto& rec : data) {
    for (const Epoch& epoch : split_epochs(rec)) {
      const MinutePrediction p = predict_minute(model, epoch, cfg);
      std::snprintf(buf, sizeof(buf), "%.6f", p.mean_score);
      out << p.patient_id << ',' << p.minute_index << ',' << p.predicted << ','
          << p.segment_votes[0] << ',' << p.segment_votes[1] << ',' << buf << '\n';
      ++minutes;
    }
  }
  std::printf("predicted %zu minutes -> %s\n", minutes, out_path.c_str());
  return 0;
}

int run_evaluate(const CommonOptions& opt, const std::string& out_path) {
  warn_if_unsupported_window(opt.window_s);
  const auto data = load_dataset(opt.data_dir);
  const PipelineConfig cfg = opt.pipeline();
  const EvalReport report = evaluate(data, cfg, opt.jobs);

  const std::vector<AblationRow> rows{{config_label(cfg), report}};
  write_report_table(std::cout, rows);
  auto out = open_output(out_path);
  write_report_csv(out, rows);
  return 0;
}

int run_ablate(const CommonOptions& opt, const std::string& sweep, int k_start,
               const std::string& out_path) {
  const auto data = load_dataset(opt.data_dir);
  const PipelineConfig cfg = opt.pipeline();

  std::vector<AblationRow> rows;
  if (sweep == "windows")
    rows = ablate_windows(data, cfg, kSupportedWindowsS, opt.jobs);
  else if (sweep == "sensors")
    rows = ablate_sensors(data, cfg, opt.jobs);
  else if (sweep == "patients")
    rows = ablate_patient_count(data, cfg, k_start, opt.jobs);
  else
    rows = compare_feature_sets(data, cfg, opt.jobs);

  write_report_table(std::cout, rows);
  auto out = open_output(out_path);
  write_report_csv(out, rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Early-mobility recognition pipeline for dual-accelerometer recordings"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "INI file with per-subcommand [section] defaults; flags win");

  SynthConfig synth_cfg;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic dataset");
  synth->fallthrough();
  synth->footer(
      "Writes per patient: <id>_chest.csv and <id>_thigh.csv (header\n"
      "timestamp,x,y,z; seconds and g units), <id>_labels.csv (header\n"
      "minute,label; labels 0=lying still, 1=lying with activity) and\n"
      "<id>_truth.csv (minute,label,spliced,splice_start_s,splice_dur_s).");
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--patients", synth_cfg.n_patients, "Number of patients")->default_val(8);
  synth->add_option("--minutes", synth_cfg.minutes_per_patient, "Labeled minutes per patient")
      ->default_val(70);
  synth->add_option("--balance", synth_cfg.class_balance, "Probability a minute is EM")
      ->default_val(0.5);
  synth->add_option("--mix", synth_cfg.label_mix_rate,
                    "Fraction of minutes spliced with the opposite activity")
      ->default_val(0.0);
  synth->add_option("--noise", synth_cfg.noise_std_g, "White noise std in g")->default_val(0.02);
  synth->add_option("--fs", synth_cfg.fs_hz, "Sampling rate in Hz")->default_val(30.0);
  synth->add_option("--seed", synth_cfg.seed, "Master seed")->default_val(0);

  CommonOptions feat_opt;
  std::string feat_out;
  auto* features = app.add_subcommand("features", "Emit per-segment feature vectors as CSV");
  features->fallthrough();
  features->footer(
      "Reads <id>_{chest,thigh,labels}.csv triples from --data. Output CSV:\n"
      "one row per segment, columns = the canonical feature names for the\n"
      "layout followed by patient_id,minute,offset_s,label.");
  features->add_option("--data", feat_opt.data_dir, "Dataset directory")->required();
  features->add_option("--out", feat_out, "Output CSV")->required();
  add_model_options(features, feat_opt);

  CommonOptions train_opt;
  std::string train_out;
  auto* train = app.add_subcommand("train", "Train a bagging model on segment features");
  train->fallthrough();
  train->footer(
      "Reads <id>_{chest,thigh,labels}.csv triples from --data and writes a\n"
      "versioned JSON model bundle (format emrec.bagging v1 plus a pipeline\n"
      "section with window and sensor settings).");
  train->add_option("--data", train_opt.data_dir, "Dataset directory")->required();
  train->add_option("--out", train_out, "Model file")->required();
  add_model_options(train, train_opt);

  std::string predict_model, predict_data, predict_out;
  auto* predict = app.add_subcommand("predict", "Per-minute predictions via segment voting");
  predict->fallthrough();
  predict->footer(
      "Applies a model bundle to --data and writes one row per labeled\n"
      "minute: patient_id,minute,predicted,votes_0,votes_1,mean_score.");
  predict->add_option("--model", predict_model, "Trained model file")->required();
  predict->add_option("--data", predict_data, "Dataset directory")->required();
  predict->add_option("--out", predict_out, "Output CSV")->required();

  CommonOptions eval_opt;
  std::string eval_out;
  auto* evaluate = app.add_subcommand("evaluate", "Leave-one-patient-out evaluation");
  evaluate->fallthrough();
  evaluate->footer(
      "Prints a summary table and writes a long-format CSV:\n"
      "config,patient_id,accuracy rows plus mean and instability rows\n"
      "(instability = population std of per-patient accuracies).");
  evaluate->add_option("--data", eval_opt.data_dir, "Dataset directory")->required();
  evaluate->add_option("--out", eval_out, "Report CSV")->required();
  add_model_options(evaluate, eval_opt);

  CommonOptions ablate_opt;
  std::string ablate_out, sweep;
  int k_start = 5;
  auto* ablate = app.add_subcommand("ablate", "Window, sensor, patient-count, feature sweeps");
  ablate->fallthrough();
  ablate->footer(
      "Sweeps: windows {4,10,20,30,60} s; sensors {chest,thigh,both};\n"
      "patients (LOPO over every subset size from --k-start up); features\n"
      "(magnitude layout vs per-axis comparator). Same CSV format as\n"
      "evaluate, one config label per row group.");
  ablate->add_option("--data", ablate_opt.data_dir, "Dataset directory")->required();
  ablate->add_option("--out", ablate_out, "Report CSV")->required();
  ablate->add_option("--sweep", sweep, "One of: windows, sensors, patients, features")
      ->required()
      ->check(CLI::IsMember({"windows", "sensors", "patients", "features"}));
  ablate->add_option("--k-start", k_start, "Smallest patient count for the patients sweep")
      ->default_val(5);
  add_model_options(ablate, ablate_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (synth->parsed()) return run_synth(synth_cfg, synth_out);
    if (features->parsed()) return run_features(feat_opt, feat_out);
    if (train->parsed()) return run_train(train_opt, train_out);
    if (predict->parsed()) return run_predict(predict_model, predict_data, predict_out);
    if (evaluate->parsed()) return run_evaluate(eval_opt, eval_out);
    if (ablate->parsed()) return run_ablate(ablate_opt, sweep, k_start, ablate_out);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 2;
  }
  return 0;
}
