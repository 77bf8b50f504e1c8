#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace emrec {

struct TrainConfig {
  int n_trees = 100;
  int max_depth = -1;        // -1 = unlimited
  int min_samples_leaf = 2;  // bootstrap multiplicity counts toward the minimum
  bool bootstrap = true;
};

// Either a leaf (counts) or a split; samples with value <= threshold go left.
struct TreeNode {
  bool is_leaf = true;
  int feature = -1;
  double threshold = 0.0;
  std::array<std::int64_t, 2> counts{0, 0};
  int left = -1;
  int right = -1;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  // Leaf majority class; leaf ties resolve to class 0.
  int predict(std::span<const double> features) const;
  const TreeNode& root() const { return nodes.front(); }
};

struct Prediction {
  int label = 0;
  double score = 0.0;  // fraction of trees voting class 1
};

// Row-major n x d training matrix view with 0/1 labels.
struct Dataset {
  std::span<const double> values;
  std::span<const int> labels;
  std::size_t n = 0;
  std::size_t d = 0;

  std::span<const double> row(std::size_t i) const { return values.subspan(i * d, d); }
};

// 1 - sum p_i^2 over the class distribution.
double gini(std::span<const std::int64_t> class_counts);

// Greedy CART on weighted samples (weights default to 1). Candidate
// thresholds are midpoints between consecutive distinct sorted values; ties
// in impurity resolve to the lowest feature index, then lowest threshold.
Tree train_tree(const Dataset& data, const TrainConfig& cfg,
                std::span<const std::int64_t> weights = {});

// The bootstrap resample of tree `tree_index` for a model trained with
// `seed`: n draws with replacement from Rng(stable_hash(seed, tree_index)).
std::vector<std::size_t> bootstrap_indices(std::uint64_t seed, std::size_t tree_index,
                                           std::size_t n);

struct BaggingModel {
  int version = 1;
  std::uint64_t seed = 0;
  TrainConfig config;
  std::uint64_t feature_order_digest = 0;
  std::size_t n_features = 0;
  std::vector<std::string> feature_names;
  std::vector<Tree> trees;

  // Majority vote over trees; a 50/50 tie resolves to class 0.
  Prediction predict(std::span<const double> features) const;

  // Throws CompatibilityError unless the caller's feature layout digest
  // matches the one the model was trained with.
  void verify_digest(std::uint64_t expected) const;
};

// Trees are seeded per index, so any `jobs` level yields the same model.
BaggingModel train_bagging(const Dataset& data, const TrainConfig& cfg, std::uint64_t seed,
                           std::uint64_t feature_order_digest,
                           std::vector<std::string> feature_names, int jobs = 1);

// Versioned JSON document; load(save(m)) predicts identically to m.
void save_model(std::ostream& out, const BaggingModel& model);
BaggingModel load_model(std::istream& in);
void save_model_file(const std::filesystem::path& path, const BaggingModel& model);
BaggingModel load_model_file(const std::filesystem::path& path);

}  // namespace emrec
