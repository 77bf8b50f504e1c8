#include "emrec/pipeline.hpp"

#include <fstream>
#include <utility>

#include "emrec/error.hpp"
#include "emrec/parallel.hpp"
#include "emrec/windowing.hpp"
#include "model_json.hpp"

namespace emrec {

FeatureTable featurize(std::span<const LabeledRecording> data, double window_s,
                       const FeatureLayout& layout, int jobs) {
  FeatureTable table;
  table.d = layout.size();

  std::vector<Segment> segments;
  for (const auto& rec : data) {
    table.patients.push_back(rec.patient_id);
    const auto patient = static_cast<std::uint32_t>(table.patients.size() - 1);
    for (const Epoch& epoch : split_epochs(rec)) {
      for (Segment& seg : segment_epoch(epoch, window_s)) {
        table.labels.push_back(label_index(seg.label));
        table.info.push_back({patient, seg.minute_index, seg.offset_s});
        segments.push_back(std::move(seg));
      }
    }
  }

  table.values.resize(segments.size() * table.d);
  parallel_for(segments.size(), jobs, [&](std::size_t i) {
    const std::vector<double> row = segment_features(segments[i], layout);
    std::copy(row.begin(), row.end(), table.values.begin() + static_cast<std::ptrdiff_t>(i * table.d));
  });
  return table;
}

BaggingModel train_pipeline(std::span<const LabeledRecording> data, const PipelineConfig& cfg,
                            int jobs) {
  const FeatureTable table = featurize(data, cfg.window_s, cfg.layout(), jobs);
  if (table.rows() == 0) throw DataError("no labeled minutes to train on");
  return train_bagging(table.dataset_view(), cfg.train, cfg.seed,
                       feature_digest(cfg.layout()), feature_names(cfg.layout()), jobs);
}

MinutePrediction vote_minute(std::span<const Prediction> segment_predictions,
                             std::string patient_id, std::int64_t minute_index) {
  MinutePrediction out;
  out.patient_id = std::move(patient_id);
  out.minute_index = minute_index;
  double score_sum = 0.0;
  for (const Prediction& p : segment_predictions) {
    ++out.segment_votes[static_cast<std::size_t>(p.label)];
    score_sum += p.score;
  }
  out.mean_score = segment_predictions.empty()
                       ? 0.0
                       : score_sum / static_cast<double>(segment_predictions.size());
  if (out.segment_votes[1] > out.segment_votes[0])
    out.predicted = 1;
  else if (out.segment_votes[1] < out.segment_votes[0])
    out.predicted = 0;
  else
    out.predicted = out.mean_score > 0.5 ? 1 : 0;
  return out;
}

MinutePrediction predict_minute(const BaggingModel& model, const Epoch& epoch,
                                const PipelineConfig& cfg) {
  model.verify_digest(feature_digest(cfg.layout()));
  std::vector<Prediction> predictions;
  for (const Segment& seg : segment_epoch(epoch, cfg.window_s))
    predictions.push_back(model.predict(segment_features(seg, cfg.layout())));
  return vote_minute(predictions, epoch.patient_id, epoch.minute_index);
}

namespace {

const char* subset_tag(SensorSubset s) {
  switch (s) {
    case SensorSubset::kChestOnly: return "chest_only";
    case SensorSubset::kThighOnly: return "thigh_only";
    case SensorSubset::kBoth: return "both";
  }
  return "both";
}

SensorSubset subset_from_tag(const std::string& tag) {
  if (tag == "chest_only") return SensorSubset::kChestOnly;
  if (tag == "thigh_only") return SensorSubset::kThighOnly;
  if (tag == "both") return SensorSubset::kBoth;
  throw ParseError("unknown sensor subset '" + tag + "'");
}

}  // namespace

void save_pipeline_file(const std::filesystem::path& path, const BaggingModel& model,
                        const PipelineConfig& cfg) {
  nlohmann::ordered_json doc = model_to_json(model);
  doc["pipeline"] = {{"window_s", cfg.window_s},
                     {"sensors", subset_tag(cfg.sensors)},
                     {"per_axis_comparator", cfg.per_axis_comparator}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << doc.dump(1, '\t') << '\n';
}

std::pair<BaggingModel, PipelineConfig> load_pipeline_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("truncated or malformed model file: ") + e.what());
  }
  BaggingModel model = model_from_json(doc);

  PipelineConfig cfg;
  cfg.train = model.config;
  cfg.seed = model.seed;
  if (doc.contains("pipeline")) {
    const auto& p = doc.at("pipeline");
    cfg.window_s = p.at("window_s").get<double>();
    cfg.sensors = subset_from_tag(p.at("sensors").get<std::string>());
    cfg.per_axis_comparator = p.value("per_axis_comparator", false);
  }
  model.verify_digest(feature_digest(cfg.layout()));
  return {std::move(model), cfg};
}

}  // namespace emrec
