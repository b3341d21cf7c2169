#pragma once

#include <span>
#include <string>
#include <vector>

#include "blamestyle/corpus.hpp"
#include "blamestyle/features.hpp"
#include "blamestyle/forest.hpp"

namespace blamestyle {

/// Out-of-fold predictions, one per evaluated fragment, sorted by fragment id.
struct ValidationResult {
  ClassList classes;
  std::vector<PredictionDistribution> predictions;
  std::vector<std::string> truth;
  std::vector<std::size_t> folds;

  std::size_t size() const { return predictions.size(); }
  bool correct(std::size_t i) const { return predictions[i].predicted() == truth[i]; }
  /// Fraction whose argmax class equals the truth; 0 when empty.
  double accuracy() const;
};

struct FoldModel {
  FeatureDictionary dictionary;
  RandomForestModel model;
};

/// Dictionary and forest fit on `train` (canonically sorted by fragment id first).
FoldModel fit_fold(std::vector<const FragmentCounts*> train, const ForestConfig& cfg, ClassList classes);

/// Seed used for fold `fold` of a run seeded with `seed`.
std::uint64_t fold_seed(std::uint64_t seed, std::size_t fold);

/// For each fold i, fits on the `pool` fragments outside fold i and predicts
/// fold i. `extra` fragments are never trained on; each is predicted once, by
/// the model of the fold given in `extra_folds`. Classes are the sorted
/// authors of `pool`.
ValidationResult cross_validate(std::span<const FragmentCounts> pool, const FoldPlan& plan, const ForestConfig& cfg,
                                std::span<const FragmentCounts> extra = {},
                                std::span<const std::size_t> extra_folds = {});
/// Extracts features and runs the plain closed-world cross-validation.
ValidationResult cross_validate(const Corpus& c, const FoldPlan& plan, const ForestConfig& cfg);

/// Cross-validated accuracy on the fragments of authors `a` and `b` only.
double two_class_task(std::span<const FragmentCounts> counts, const std::string& a, const std::string& b,
                      const ForestConfig& cfg, const FoldPlan& plan);

/// Label given to the merged complement in verification_task.
inline constexpr std::string_view kComplementLabel = "~others";

/// `a` against every other author merged into one pseudo-author.
double verification_task(std::span<const FragmentCounts> counts, const std::string& a, const ForestConfig& cfg,
                         const FoldPlan& plan);

}  // namespace blamestyle
