#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "blamestyle/features.hpp"
#include "blamestyle/forest.hpp"
#include "blamestyle/validation.hpp"

namespace blamestyle {

enum class MergeOrder : std::uint8_t { Ordered, Random };
enum class MergeNormalization : std::uint8_t { Sum, Average };

struct GroupingSpec {
  std::size_t group_size = 1;
  MergeOrder mode = MergeOrder::Ordered;
  std::uint64_t seed = 0;
};

/// Fragments known to share one (hidden) author.
struct SampleGroup {
  std::string group_id;
  std::vector<std::string> fragment_ids;
  std::string truth;
};

/// Chunks one author's fragments: ordered mode uses fragment-id order, random
/// mode a seeded shuffle. A ragged final chunk is dropped.
std::vector<SampleGroup> group_samples(std::span<const std::string> fragment_ids, const std::string& author,
                                       const GroupingSpec& spec);

/// Elementwise mean. Throws DataError on an empty input or differing class lists.
PredictionDistribution average_distributions(std::span<const PredictionDistribution> ds);

struct GroupAttribution {
  std::string group_id;
  std::string truth;
  std::string predicted;
  double confidence = 0.0;
  std::size_t group_size = 0;

  bool correct() const { return predicted == truth; }
};

/// Argmax of the averaged member distributions.
GroupAttribution attribute_group(const RandomForestModel& m, const SampleGroup& g,
                                 std::span<const SparseFeatureVector> member_vectors);
/// Same, from already computed out-of-fold predictions.
GroupAttribution attribute_group(const ValidationResult& r, const SampleGroup& g);

/// Groups each author's predictions inside each test fold and attributes them.
/// Throws DataError naming the constraint unless group_size divides every
/// (author, fold) fragment count.
/// The formed groups are appended to `groups_out` when given.
std::vector<GroupAttribution> aggregate_predictions(const ValidationResult& r, const GroupingSpec& spec,
                                                   std::vector<SampleGroup>* groups_out = nullptr);

double group_accuracy(std::span<const GroupAttribution> groups);
/// CSV header `group_id,truth,predicted,confidence,group_size`.
void write_group_attributions(std::ostream& os, std::span<const GroupAttribution> groups);

SparseFeatureVector merge_vectors(std::span<const SparseFeatureVector> vs, MergeNormalization normalize);

struct MergeCombination {
  bool train_merged = true;
  bool test_merged = true;
};

/// Group-level stratified folds: every author's groups are dealt round-robin
/// to `folds` folds after a seeded shuffle. Requires group_size * folds to
/// divide each author's fragment count.
FoldPlan group_fold_plan(std::span<const FragmentCounts> counts, const GroupingSpec& spec, std::size_t folds,
                         std::uint64_t seed, std::vector<SampleGroup>* groups_out = nullptr);

/// Runs one train/test merge combination with averaged merges and returns its
/// accuracy (per group when testing merged, per fragment otherwise).
double merged_experiment(std::span<const FragmentCounts> counts, const GroupingSpec& spec, const ForestConfig& cfg,
                         std::size_t folds, MergeCombination combination, std::uint64_t seed);

/// Per class: population standard deviation over mean of the members'
/// probabilities; absent where the mean is 0. Needs at least two members.
std::vector<std::optional<double>> coefficient_of_variation(std::span<const PredictionDistribution> ds);

}  // namespace blamestyle
