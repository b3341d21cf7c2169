#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "blamestyle/sparse.hpp"

namespace blamestyle {

struct ForestConfig {
  std::size_t n_trees = 50;
  std::size_t max_depth = 0;  // 0 = unlimited
  std::size_t features_per_split = 50;
  std::size_t min_samples_leaf = 1;
  bool bootstrap = true;
  std::uint64_t seed = 0;

  /// Throws DataError when n_trees or features_per_split is 0.
  void validate() const;
  bool operator==(const ForestConfig&) const = default;
};

struct TreeNode {
  std::int32_t column = -1;  // -1 marks a leaf
  double threshold = 0.0;    // go left when value <= threshold
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  std::vector<double> class_weights;  // leaves only: weighted training counts

  bool is_leaf() const { return column < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  /// Leaf reached by `x`.
  const TreeNode& leaf_for(const SparseFeatureVector& x) const;
  /// Majority class of that leaf, ties to the lower class index.
  std::uint32_t vote(const SparseFeatureVector& x) const;
  std::size_t depth() const;
  bool operator==(const DecisionTree&) const = default;
};

using ClassList = std::shared_ptr<const std::vector<std::string>>;

/// Probability vector over a model's classes plus the fragments it covers.
struct PredictionDistribution {
  std::vector<double> probs;
  std::vector<std::string> fragment_ids;
  ClassList classes;

  /// Highest probability, ties to the lower index.
  std::size_t argmax() const;
  double confidence() const { return probs.at(argmax()); }
  const std::string& predicted() const { return classes->at(argmax()); }
};

struct RandomForestModel {
  ClassList classes;  // sorted, unique
  std::size_t dimension = 0;
  ForestConfig config;
  std::vector<DecisionTree> trees;

  /// votes_c / n_trees. Throws DataError on a dimension mismatch.
  PredictionDistribution predict_distribution(const SparseFeatureVector& x) const;
  std::vector<PredictionDistribution> predict_all(std::span<const SparseFeatureVector> xs) const;

  bool operator==(const RandomForestModel& o) const {
    return *classes == *o.classes && dimension == o.dimension && config == o.config && trees == o.trees;
  }
};

/// Row-major training matrix with class indices into `classes`.
struct TrainingSet {
  std::vector<SparseFeatureVector> rows;
  std::vector<std::uint32_t> labels;
  ClassList classes;
  std::size_t dimension = 0;

  /// Classes become the sorted distinct labels.
  static TrainingSet from_labels(std::vector<SparseFeatureVector> rows, std::span<const std::string> labels);
  /// Uses a fixed class list (which may include classes absent from `labels`).
  static TrainingSet with_classes(std::vector<SparseFeatureVector> rows, std::span<const std::string> labels,
                                  ClassList classes);
};

/// Grows cfg.n_trees trees in parallel. Each tree draws from its own stream
/// derived from (cfg.seed, tree index), so the thread count never changes the
/// model. Throws DataError on empty input, mismatched lengths or fewer than two
/// distinct labels.
RandomForestModel train_forest(const TrainingSet& data, const ForestConfig& cfg);
RandomForestModel train_forest(std::span<const SparseFeatureVector> xs, std::span<const std::string> labels,
                               const ForestConfig& cfg);

void write_model(std::ostream& os, const RandomForestModel& m);
RandomForestModel read_model(std::istream& is);
void write_model(const std::filesystem::path& path, const RandomForestModel& m);
RandomForestModel read_model(const std::filesystem::path& path);

/// Weighted Gini impurity 1 - sum (w_k / W)^2; 0 for an empty node.
double gini(std::span<const double> class_weights);

namespace reference {

/// Single-threaded training with the same per-tree streams as train_forest.
RandomForestModel train_forest_serial(const TrainingSet& data, const ForestConfig& cfg);
std::vector<PredictionDistribution> predict_all_serial(const RandomForestModel& m,
                                                       std::span<const SparseFeatureVector> xs);

}  // namespace reference

}  // namespace blamestyle
