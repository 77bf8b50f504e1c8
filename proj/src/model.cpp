#include "emrec/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <utility>

#include "emrec/error.hpp"
#include "emrec/parallel.hpp"
#include "emrec/rng.hpp"
#include "model_json.hpp"

namespace emrec {

double gini(std::span<const std::int64_t> class_counts) {
  std::int64_t total = 0;
  for (std::int64_t c : class_counts) {
    if (c < 0) throw DataError("negative class count");
    total += c;
  }
  if (total == 0) throw DataError("gini of an empty class distribution");
  double sum_sq = 0.0;
  for (std::int64_t c : class_counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

int Tree::predict(std::span<const double> features) const {
  std::size_t at = 0;
  while (!nodes[at].is_leaf) {
    const TreeNode& node = nodes[at];
    at = static_cast<std::size_t>(features[static_cast<std::size_t>(node.feature)] <=
                                          node.threshold
                                      ? node.left
                                      : node.right);
  }
  const auto& counts = nodes[at].counts;
  return counts[1] > counts[0] ? 1 : 0;
}

namespace {

// Split goodness as an exact fraction. Minimizing weighted Gini impurity is
// equivalent to maximizing sum(l_c^2)/w_l + sum(r_c^2)/w_r; the integer
// cross-product comparison detects mathematically tied splits exactly, so
// the documented tie rules (lowest feature, then lowest threshold) apply
// identically here and in any exhaustive re-implementation.
struct SplitGoodness {
  std::int64_t num = -1;
  std::int64_t den = 1;

  bool better_than(const SplitGoodness& o) const {
    return static_cast<__int128>(num) * o.den > static_cast<__int128>(o.num) * den;
  }
};

SplitGoodness goodness_of(const std::array<std::int64_t, 2>& left,
                          const std::array<std::int64_t, 2>& right) {
  const std::int64_t wl = left[0] + left[1];
  const std::int64_t wr = right[0] + right[1];
  const std::int64_t a = left[0] * left[0] + left[1] * left[1];
  const std::int64_t b = right[0] * right[0] + right[1] * right[1];
  return {a * wr + b * wl, wl * wr};
}

struct BestSplit {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  SplitGoodness goodness;
};

// Presorted splitter: every feature keeps an index array sorted by value,
// built once per tree. A node owns the same index range [lo, hi) in all
// feature arrays; splitting stable-partitions each array in place, so no
// per-node re-sorting happens. Candidate thresholds and tie rules are
// unchanged: boundaries between consecutive distinct values, scanned in
// ascending feature then ascending threshold order.
class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const TrainConfig& cfg,
              std::span<const std::int64_t> weights)
      : data_(data), cfg_(cfg), weights_(weights) {}

  Tree build() {
    std::vector<std::uint32_t> members;
    members.reserve(data_.n);
    for (std::size_t i = 0; i < data_.n; ++i)
      if (weight(i) > 0) members.push_back(static_cast<std::uint32_t>(i));
    if (members.empty()) throw DataError("empty training set");

    m_ = members.size();
    order_.resize(data_.d * m_);
    for (std::size_t f = 0; f < data_.d; ++f) {
      std::uint32_t* row = order_row(f);
      std::copy(members.begin(), members.end(), row);
      std::sort(row, row + m_, [this, f](std::uint32_t a, std::uint32_t b) {
        const double va = value(a, f), vb = value(b, f);
        return va < vb || (va == vb && a < b);
      });
    }
    scratch_.resize(m_);

    Tree tree;
    build_node(tree, 0, m_, 0);
    return tree;
  }

 private:
  std::int64_t weight(std::size_t i) const {
    return weights_.empty() ? 1 : weights_[i];
  }

  double value(std::size_t i, std::size_t f) const {
    return data_.values[i * data_.d + f];
  }

  std::uint32_t* order_row(std::size_t f) { return order_.data() + f * m_; }

  std::array<std::int64_t, 2> range_counts(std::size_t lo, std::size_t hi) {
    std::array<std::int64_t, 2> counts{0, 0};
    const std::uint32_t* row = order_row(0);
    for (std::size_t p = lo; p < hi; ++p) {
      const std::uint32_t i = row[p];
      counts[static_cast<std::size_t>(data_.labels[i])] += weight(i);
    }
    return counts;
  }

  BestSplit find_best_split(std::size_t lo, std::size_t hi,
                            const std::array<std::int64_t, 2>& total) {
    const std::int64_t msl = cfg_.min_samples_leaf;
    const std::int64_t total_w = total[0] + total[1];
    BestSplit best;

    for (std::size_t f = 0; f < data_.d; ++f) {
      const std::uint32_t* row = order_row(f);
      std::array<std::int64_t, 2> left{0, 0};
      double prev_value = 0.0;
      for (std::size_t p = lo; p < hi; ++p) {
        const std::uint32_t i = row[p];
        const double v = value(i, f);
        if (p > lo && v > prev_value) {
          const std::int64_t wl = left[0] + left[1];
          if (wl >= msl && total_w - wl >= msl) {
            const std::array<std::int64_t, 2> right{total[0] - left[0], total[1] - left[1]};
            const SplitGoodness g = goodness_of(left, right);
            if (g.better_than(best.goodness)) {
              best.found = true;
              best.feature = static_cast<int>(f);
              best.threshold = (prev_value + v) / 2.0;
              best.goodness = g;
            }
          }
        }
        left[static_cast<std::size_t>(data_.labels[i])] += weight(i);
        prev_value = v;
      }
    }
    return best;
  }

  // Stable partition of every feature's index range by the split predicate;
  // returns the left-side size (identical across features).
  std::size_t partition(std::size_t lo, std::size_t hi, std::size_t split_f,
                        double threshold) {
    std::size_t left_n = 0;
    for (std::size_t f = 0; f < data_.d; ++f) {
      std::uint32_t* row = order_row(f);
      std::size_t write = lo, spill = 0;
      for (std::size_t p = lo; p < hi; ++p) {
        const std::uint32_t i = row[p];
        if (value(i, split_f) <= threshold)
          row[write++] = i;
        else
          scratch_[spill++] = i;
      }
      std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(spill),
                row + write);
      left_n = write - lo;
    }
    return left_n;
  }

  int make_leaf(Tree& tree, const std::array<std::int64_t, 2>& counts) {
    TreeNode node;
    node.is_leaf = true;
    node.counts = counts;
    tree.nodes.push_back(node);
    return static_cast<int>(tree.nodes.size() - 1);
  }

  int build_node(Tree& tree, std::size_t lo, std::size_t hi, int depth) {
    const auto counts = range_counts(lo, hi);
    const bool pure = counts[0] == 0 || counts[1] == 0;
    const bool depth_capped = cfg_.max_depth >= 0 && depth >= cfg_.max_depth;
    if (pure || depth_capped) return make_leaf(tree, counts);

    const BestSplit best = find_best_split(lo, hi, counts);
    if (!best.found) return make_leaf(tree, counts);

    const std::size_t left_n =
        partition(lo, hi, static_cast<std::size_t>(best.feature), best.threshold);

    const int at = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{});
    const int left = build_node(tree, lo, lo + left_n, depth + 1);
    const int right = build_node(tree, lo + left_n, hi, depth + 1);
    TreeNode& node = tree.nodes[static_cast<std::size_t>(at)];
    node.is_leaf = false;
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.counts = {0, 0};
    node.left = left;
    node.right = right;
    return at;
  }

  const Dataset& data_;
  const TrainConfig& cfg_;
  std::span<const std::int64_t> weights_;
  std::size_t m_ = 0;
  std::vector<std::uint32_t> order_;
  std::vector<std::uint32_t> scratch_;
};

void validate_dataset(const Dataset& data) {
  if (data.n == 0) throw DataError("empty training set");
  if (data.d == 0) throw DataError("training set has no features");
  if (data.values.size() != data.n * data.d || data.labels.size() != data.n)
    throw ParameterError("dataset dimensions are inconsistent");
  for (int label : data.labels)
    if (label != 0 && label != 1) throw DataError("labels must be 0 or 1");
}

void validate_config(const TrainConfig& cfg) {
  if (cfg.n_trees < 1) throw ParameterError("n_trees must be >= 1");
  if (cfg.min_samples_leaf < 1) throw ParameterError("min_samples_leaf must be >= 1");
}

}  // namespace

Tree train_tree(const Dataset& data, const TrainConfig& cfg,
                std::span<const std::int64_t> weights) {
  validate_dataset(data);
  validate_config(cfg);
  if (!weights.empty() && weights.size() != data.n)
    throw ParameterError("weight vector length mismatch");
  return TreeBuilder(data, cfg, weights).build();
}

std::vector<std::size_t> bootstrap_indices(std::uint64_t seed, std::size_t tree_index,
                                           std::size_t n) {
  Rng rng(stable_hash(seed, tree_index));
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = static_cast<std::size_t>(rng.next_below(n));
  return idx;
}

BaggingModel train_bagging(const Dataset& data, const TrainConfig& cfg, std::uint64_t seed,
                           std::uint64_t feature_order_digest,
                           std::vector<std::string> feature_names, int jobs) {
  validate_dataset(data);
  validate_config(cfg);

  BaggingModel model;
  model.seed = seed;
  model.config = cfg;
  model.feature_order_digest = feature_order_digest;
  model.n_features = data.d;
  model.feature_names = std::move(feature_names);
  model.trees.resize(static_cast<std::size_t>(cfg.n_trees));

  parallel_for(static_cast<std::size_t>(cfg.n_trees), jobs, [&](std::size_t t) {
    if (cfg.bootstrap) {
      std::vector<std::int64_t> weights(data.n, 0);
      for (std::size_t i : bootstrap_indices(seed, t, data.n)) ++weights[i];
      model.trees[t] = train_tree(data, cfg, weights);
    } else {
      model.trees[t] = train_tree(data, cfg);
    }
  });
  return model;
}

Prediction BaggingModel::predict(std::span<const double> features) const {
  if (features.size() != n_features)
    throw CompatibilityError("feature vector length " + std::to_string(features.size()) +
                             " does not match model layout of " + std::to_string(n_features));
  std::int64_t votes_for_one = 0;
  for (const Tree& tree : trees) votes_for_one += tree.predict(features);
  Prediction p;
  p.score = static_cast<double>(votes_for_one) / static_cast<double>(trees.size());
  p.label = p.score > 0.5 ? 1 : 0;
  return p;
}

void BaggingModel::verify_digest(std::uint64_t expected) const {
  if (feature_order_digest != expected) {
    char buf[96];
    std::snprintf(buf, sizeof(buf),
                  "feature order digest mismatch: model %016llx, caller %016llx",
                  static_cast<unsigned long long>(feature_order_digest),
                  static_cast<unsigned long long>(expected));
    throw CompatibilityError(buf);
  }
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr const char* kFormatTag = "emrec.bagging";
constexpr int kFormatVersion = 1;

std::string digest_to_hex(std::uint64_t digest) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(digest));
  return buf;
}

nlohmann::ordered_json node_to_json(const Tree& tree, int at) {
  const TreeNode& node = tree.nodes[static_cast<std::size_t>(at)];
  nlohmann::ordered_json j;
  if (node.is_leaf) {
    j["counts"] = {node.counts[0], node.counts[1]};
  } else {
    j["feature"] = node.feature;
    j["threshold"] = node.threshold;
    j["left"] = node_to_json(tree, node.left);
    j["right"] = node_to_json(tree, node.right);
  }
  return j;
}

int node_from_json(const nlohmann::json& j, Tree& tree, std::size_t n_features) {
  const int at = static_cast<int>(tree.nodes.size());
  tree.nodes.push_back(TreeNode{});
  if (j.contains("counts")) {
    const auto counts = j.at("counts");
    if (!counts.is_array() || counts.size() != 2) throw ParseError("bad leaf counts");
    TreeNode& node = tree.nodes[static_cast<std::size_t>(at)];
    node.is_leaf = true;
    node.counts = {counts.at(0).get<std::int64_t>(), counts.at(1).get<std::int64_t>()};
    if (node.counts[0] < 0 || node.counts[1] < 0) throw ParseError("negative leaf count");
    return at;
  }
  const int feature = j.at("feature").get<int>();
  if (feature < 0 || static_cast<std::size_t>(feature) >= n_features)
    throw ParseError("split feature out of range");
  const double threshold = j.at("threshold").get<double>();
  const int left = node_from_json(j.at("left"), tree, n_features);
  const int right = node_from_json(j.at("right"), tree, n_features);
  TreeNode& node = tree.nodes[static_cast<std::size_t>(at)];
  node.is_leaf = false;
  node.feature = feature;
  node.threshold = threshold;
  node.left = left;
  node.right = right;
  return at;
}

}  // namespace

nlohmann::ordered_json model_to_json(const BaggingModel& model) {
  nlohmann::ordered_json doc;
  doc["format"] = kFormatTag;
  doc["version"] = model.version;
  doc["seed"] = model.seed;
  doc["config"] = {{"n_trees", model.config.n_trees},
                   {"max_depth", model.config.max_depth},
                   {"min_samples_leaf", model.config.min_samples_leaf},
                   {"bootstrap", model.config.bootstrap}};
  doc["feature_order_digest"] = digest_to_hex(model.feature_order_digest);
  doc["n_features"] = model.n_features;
  doc["feature_names"] = model.feature_names;
  nlohmann::ordered_json trees = nlohmann::ordered_json::array();
  for (const Tree& tree : model.trees) trees.push_back(node_to_json(tree, 0));
  doc["trees"] = std::move(trees);
  return doc;
}

BaggingModel model_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || doc.value("format", "") != kFormatTag)
    throw CompatibilityError("not an emrec.bagging model file");
  if (doc.value("version", -1) != kFormatVersion)
    throw CompatibilityError("unsupported model version");

  BaggingModel model;
  model.version = kFormatVersion;
  model.seed = doc.at("seed").get<std::uint64_t>();
  const auto& cfg = doc.at("config");
  model.config.n_trees = cfg.at("n_trees").get<int>();
  model.config.max_depth = cfg.at("max_depth").get<int>();
  model.config.min_samples_leaf = cfg.at("min_samples_leaf").get<int>();
  model.config.bootstrap = cfg.at("bootstrap").get<bool>();
  model.feature_order_digest =
      std::strtoull(doc.at("feature_order_digest").get<std::string>().c_str(), nullptr, 16);
  model.n_features = doc.at("n_features").get<std::size_t>();
  model.feature_names = doc.at("feature_names").get<std::vector<std::string>>();

  const auto& trees = doc.at("trees");
  if (!trees.is_array() || trees.empty()) throw ParseError("model holds no trees");
  if (static_cast<int>(trees.size()) != model.config.n_trees)
    throw ParseError("tree count does not match config");
  for (const auto& tj : trees) {
    Tree tree;
    node_from_json(tj, tree, model.n_features);
    model.trees.push_back(std::move(tree));
  }
  return model;
}

void save_model(std::ostream& out, const BaggingModel& model) {
  out << model_to_json(model).dump(1, '\t') << '\n';
}

BaggingModel load_model(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("truncated or malformed model file: ") + e.what());
  }
  try {
    return model_from_json(doc);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model file missing fields: ") + e.what());
  }
}

void save_model_file(const std::filesystem::path& path, const BaggingModel& model) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  save_model(out, model);
}

BaggingModel load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return load_model(in);
}

}  // namespace emrec
