#include "blamestyle/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <unordered_map>

#include "blamestyle/error.hpp"
#include "blamestyle/random.hpp"

namespace blamestyle {

std::vector<SampleGroup> group_samples(std::span<const std::string> fragment_ids, const std::string& author,
                                       const GroupingSpec& spec) {
  if (spec.group_size < 1) throw DataError("group size must be at least 1");
  std::vector<std::string> order(fragment_ids.begin(), fragment_ids.end());
  std::sort(order.begin(), order.end());
  if (spec.mode == MergeOrder::Random) {
    Rng rng = make_rng(derive_seed(spec.seed, "group"), hash_name(author));
    shuffle_in_place(order, rng);
  }
  std::vector<SampleGroup> groups;
  for (std::size_t start = 0; start + spec.group_size <= order.size(); start += spec.group_size) {
    SampleGroup g;
    g.group_id = author + "#" + std::to_string(groups.size());
    g.truth = author;
    g.fragment_ids.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                          order.begin() + static_cast<std::ptrdiff_t>(start + spec.group_size));
    groups.push_back(std::move(g));
  }
  return groups;
}

PredictionDistribution average_distributions(std::span<const PredictionDistribution> ds) {
  if (ds.empty()) throw DataError("cannot average an empty set of distributions");
  PredictionDistribution out;
  out.classes = ds.front().classes;
  out.probs.assign(ds.front().probs.size(), 0.0);
  for (const PredictionDistribution& d : ds) {
    const bool same_classes =
        d.classes == out.classes || (d.classes && out.classes && *d.classes == *out.classes);
    if (!same_classes || d.probs.size() != out.probs.size()) {
      throw DataError("cannot average distributions over different class sets");
    }
    for (std::size_t k = 0; k < d.probs.size(); ++k) out.probs[k] += d.probs[k];
    out.fragment_ids.insert(out.fragment_ids.end(), d.fragment_ids.begin(), d.fragment_ids.end());
  }
  const double n = static_cast<double>(ds.size());
  for (double& p : out.probs) p /= n;
  return out;
}

namespace {

GroupAttribution from_average(const SampleGroup& g, const PredictionDistribution& avg) {
  GroupAttribution a;
  a.group_id = g.group_id;
  a.truth = g.truth;
  a.predicted = avg.predicted();
  a.confidence = avg.confidence();
  a.group_size = g.fragment_ids.size();
  return a;
}

}  // namespace

GroupAttribution attribute_group(const RandomForestModel& m, const SampleGroup& g,
                                 std::span<const SparseFeatureVector> member_vectors) {
  if (member_vectors.empty() || member_vectors.size() != g.fragment_ids.size()) {
    throw DataError("group " + g.group_id + ": member vectors do not match its fragments");
  }
  std::vector<PredictionDistribution> ds;
  ds.reserve(member_vectors.size());
  for (const SparseFeatureVector& v : member_vectors) ds.push_back(m.predict_distribution(v));
  return from_average(g, average_distributions(ds));
}

GroupAttribution attribute_group(const ValidationResult& r, const SampleGroup& g) {
  std::vector<PredictionDistribution> ds;
  for (const std::string& id : g.fragment_ids) {
    const auto it = std::lower_bound(r.predictions.begin(), r.predictions.end(), id,
                                     [](const PredictionDistribution& p, const std::string& key) {
                                       return p.fragment_ids.front() < key;
                                     });
    if (it == r.predictions.end() || it->fragment_ids.front() != id) {
      throw DataError("group " + g.group_id + ": no prediction for fragment " + id);
    }
    ds.push_back(*it);
  }
  return from_average(g, average_distributions(ds));
}

std::vector<GroupAttribution> aggregate_predictions(const ValidationResult& r, const GroupingSpec& spec,
                                                   std::vector<SampleGroup>* groups_out) {
  // (fold, author) -> fragment ids
  std::map<std::pair<std::size_t, std::string>, std::vector<std::string>> cells;
  for (std::size_t i = 0; i < r.size(); ++i) {
    cells[{r.folds[i], r.truth[i]}].push_back(r.predictions[i].fragment_ids.front());
  }
  std::vector<GroupAttribution> out;
  for (const auto& [cell, ids] : cells) {
    const auto& [fold, author] = cell;
    if (ids.size() % spec.group_size != 0) {
      throw DataError("group size " + std::to_string(spec.group_size) + " does not divide the " +
                      std::to_string(ids.size()) + " test fragments of author " + author + " in fold " +
                      std::to_string(fold) + "; group size times fold count must divide each author's fragment count");
    }
    GroupingSpec cell_spec = spec;
    cell_spec.seed = derive_seed(spec.seed, "fold-groups", fold);
    for (SampleGroup& g : group_samples(ids, author, cell_spec)) {
      g.group_id = author + "@" + std::to_string(fold) + "#" + g.group_id.substr(g.group_id.rfind('#') + 1);
      out.push_back(attribute_group(r, g));
      if (groups_out) groups_out->push_back(std::move(g));
    }
  }
  return out;
}

double group_accuracy(std::span<const GroupAttribution> groups) {
  if (groups.empty()) return 0.0;
  const auto hits = std::count_if(groups.begin(), groups.end(), [](const GroupAttribution& g) { return g.correct(); });
  return static_cast<double>(hits) / static_cast<double>(groups.size());
}

void write_group_attributions(std::ostream& os, std::span<const GroupAttribution> groups) {
  os << "group_id,truth,predicted,confidence,group_size\n";
  char buf[40];
  for (const GroupAttribution& g : groups) {
    std::snprintf(buf, sizeof buf, "%.6f", g.confidence);
    os << g.group_id << ',' << g.truth << ',' << g.predicted << ',' << buf << ',' << g.group_size << '\n';
  }
}

SparseFeatureVector merge_vectors(std::span<const SparseFeatureVector> vs, MergeNormalization normalize) {
  if (vs.empty()) throw DataError("cannot merge an empty set of vectors");
  std::map<std::uint32_t, double> acc;
  for (const SparseFeatureVector& v : vs) {
    if (v.dimension != vs.front().dimension) throw DataError("cannot merge vectors of different dimension");
    for (const auto& [col, val] : v.entries) acc[col] += val;
  }
  SparseFeatureVector out;
  out.dimension = vs.front().dimension;
  const double scale = normalize == MergeNormalization::Average ? static_cast<double>(vs.size()) : 1.0;
  for (const auto& [col, val] : acc) {
    const double v = val / scale;
    if (v != 0.0) out.entries.push_back({col, v});
  }
  return out;
}

FoldPlan group_fold_plan(std::span<const FragmentCounts> counts, const GroupingSpec& spec, std::size_t folds,
                         std::uint64_t seed, std::vector<SampleGroup>* groups_out) {
  if (folds < 2) throw DataError("merged experiments need at least two folds");
  std::map<std::string, std::vector<std::string>> by_author;
  for (const FragmentCounts& fc : counts) by_author[fc.author_key].push_back(fc.fragment_id);
  FoldPlan plan;
  plan.k = folds;
  for (auto& [author, ids] : by_author) {
    if (ids.size() % (spec.group_size * folds) != 0) {
      throw DataError("group size " + std::to_string(spec.group_size) + " times " + std::to_string(folds) +
                      " folds must divide the " + std::to_string(ids.size()) + " fragments of author " + author);
    }
    std::vector<SampleGroup> groups = group_samples(ids, author, spec);
    Rng rng = make_rng(derive_seed(seed, "group-folds"), hash_name(author));
    shuffle_in_place(groups, rng);
    for (std::size_t i = 0; i < groups.size(); ++i) {
      for (const std::string& id : groups[i].fragment_ids) plan.assignment[id] = i % folds;
    }
    if (groups_out) groups_out->insert(groups_out->end(), groups.begin(), groups.end());
  }
  return plan;
}

double merged_experiment(std::span<const FragmentCounts> counts, const GroupingSpec& spec, const ForestConfig& cfg,
                         std::size_t folds, MergeCombination combination, std::uint64_t seed) {
  std::vector<SampleGroup> groups;
  const FoldPlan plan = group_fold_plan(counts, spec, folds, seed, &groups);
  if (!combination.train_merged && !combination.test_merged) return cross_validate(counts, plan, cfg).accuracy();

  std::unordered_map<std::string, const FragmentCounts*> by_id;
  for (const FragmentCounts& fc : counts) by_id.emplace(fc.fragment_id, &fc);
  std::sort(groups.begin(), groups.end(),
            [](const SampleGroup& a, const SampleGroup& b) { return a.group_id < b.group_id; });
  std::vector<std::string> class_names;
  for (const FragmentCounts& fc : counts) class_names.push_back(fc.author_key);
  std::sort(class_names.begin(), class_names.end());
  class_names.erase(std::unique(class_names.begin(), class_names.end()), class_names.end());
  const auto classes = std::make_shared<const std::vector<std::string>>(std::move(class_names));

  std::size_t hits = 0;
  std::size_t total = 0;
  for (std::size_t fold = 0; fold < folds; ++fold) {
    ForestConfig fold_cfg = cfg;
    fold_cfg.seed = fold_seed(cfg.seed, fold);
    std::vector<const FragmentCounts*> train;
    for (const FragmentCounts& fc : counts) {
      if (plan.fold_of(fc.fragment_id) != fold) train.push_back(&fc);
    }
    std::sort(train.begin(), train.end(),
              [](const FragmentCounts* a, const FragmentCounts* b) { return a->fragment_id < b->fragment_id; });
    std::vector<FragmentCounts> train_rows;
    for (const FragmentCounts* fc : train) train_rows.push_back(*fc);
    const FeatureDictionary dict = build_dictionary(train_rows);
    const auto group_vector = [&](const SampleGroup& g) {
      std::vector<SparseFeatureVector> members;
      for (const std::string& id : g.fragment_ids) members.push_back(vectorize(*by_id.at(id), dict));
      return merge_vectors(members, MergeNormalization::Average);
    };

    std::vector<SparseFeatureVector> xs;
    std::vector<std::string> ys;
    if (combination.train_merged) {
      for (const SampleGroup& g : groups) {
        if (plan.fold_of(g.fragment_ids.front()) == fold) continue;
        xs.push_back(group_vector(g));
        ys.push_back(g.truth);
      }
    } else {
      xs = vectorize_all(train_rows, dict);
      for (const FragmentCounts& fc : train_rows) ys.push_back(fc.author_key);
    }
    const RandomForestModel model = train_forest(TrainingSet::with_classes(std::move(xs), ys, classes), fold_cfg);

    for (const SampleGroup& g : groups) {
      if (plan.fold_of(g.fragment_ids.front()) != fold) continue;
      if (combination.test_merged) {
        hits += model.predict_distribution(group_vector(g)).predicted() == g.truth ? 1 : 0;
        ++total;
      } else {
        for (const std::string& id : g.fragment_ids) {
          hits += model.predict_distribution(vectorize(*by_id.at(id), dict)).predicted() == g.truth ? 1 : 0;
          ++total;
        }
      }
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
}

std::vector<std::optional<double>> coefficient_of_variation(std::span<const PredictionDistribution> ds) {
  if (ds.size() < 2) throw DataError("coefficient of variation needs at least two members");
  const std::size_t k = ds.front().probs.size();
  std::vector<std::optional<double>> out(k);
  const double n = static_cast<double>(ds.size());
  for (std::size_t c = 0; c < k; ++c) {
    double mean = 0.0;
    for (const PredictionDistribution& d : ds) mean += d.probs.at(c);
    mean /= n;
    if (mean <= 0.0) continue;
    double var = 0.0;
    for (const PredictionDistribution& d : ds) var += (d.probs[c] - mean) * (d.probs[c] - mean);
    out[c] = std::sqrt(var / n) / mean;
  }
  return out;
}

}  // namespace blamestyle
