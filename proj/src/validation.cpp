#include "blamestyle/validation.hpp"

#include <algorithm>
#include <numeric>

#include "blamestyle/error.hpp"
#include "blamestyle/random.hpp"

namespace blamestyle {

double ValidationResult::accuracy() const {
  if (predictions.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) hits += correct(i) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

std::uint64_t fold_seed(std::uint64_t seed, std::size_t fold) { return derive_seed(seed, "fold", fold); }

namespace {

void sort_by_id(std::vector<const FragmentCounts*>& v) {
  std::sort(v.begin(), v.end(),
            [](const FragmentCounts* a, const FragmentCounts* b) { return a->fragment_id < b->fragment_id; });
}

ClassList classes_of(std::span<const FragmentCounts> pool) {
  std::vector<std::string> classes;
  for (const FragmentCounts& fc : pool) classes.push_back(fc.author_key);
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  return std::make_shared<const std::vector<std::string>>(std::move(classes));
}

}  // namespace

FoldModel fit_fold(std::vector<const FragmentCounts*> train, const ForestConfig& cfg, ClassList classes) {
  sort_by_id(train);
  std::vector<FragmentCounts> rows;
  rows.reserve(train.size());
  for (const FragmentCounts* fc : train) rows.push_back(*fc);
  FoldModel fm;
  fm.dictionary = build_dictionary(rows);
  std::vector<std::string> labels;
  labels.reserve(rows.size());
  for (const FragmentCounts& fc : rows) labels.push_back(fc.author_key);
  fm.model = train_forest(TrainingSet::with_classes(vectorize_all(rows, fm.dictionary), labels, std::move(classes)),
                          cfg);
  return fm;
}

ValidationResult cross_validate(std::span<const FragmentCounts> pool, const FoldPlan& plan, const ForestConfig& cfg,
                                std::span<const FragmentCounts> extra, std::span<const std::size_t> extra_folds) {
  cfg.validate();
  if (extra.size() != extra_folds.size()) throw DataError("extra fragments and their folds differ in length");
  if (plan.k < 2) throw DataError("cross-validation needs at least two folds");
  ValidationResult result;
  result.classes = classes_of(pool);
  if (result.classes->size() < 2) throw DataError("cross-validation needs at least two authors");

  std::vector<std::size_t> pool_fold(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) pool_fold[i] = plan.fold_of(pool[i].fragment_id);
  for (std::size_t f : extra_folds) {
    if (f >= plan.k) throw DataError("extra fragment assigned to fold " + std::to_string(f) + " of " + std::to_string(plan.k));
  }

  struct Row {
    const FragmentCounts* counts;
    std::size_t fold;
    PredictionDistribution prediction;
  };
  std::vector<Row> rows;
  for (std::size_t fold = 0; fold < plan.k; ++fold) {
    std::vector<const FragmentCounts*> train;
    std::vector<const FragmentCounts*> test;
    for (std::size_t i = 0; i < pool.size(); ++i) (pool_fold[i] == fold ? test : train).push_back(&pool[i]);
    for (std::size_t i = 0; i < extra.size(); ++i) {
      if (extra_folds[i] == fold) test.push_back(&extra[i]);
    }
    if (test.empty()) continue;
    ForestConfig fold_cfg = cfg;
    fold_cfg.seed = fold_seed(cfg.seed, fold);
    const FoldModel fm = fit_fold(train, fold_cfg, result.classes);
    sort_by_id(test);
    std::vector<SparseFeatureVector> xs;
    xs.reserve(test.size());
    for (const FragmentCounts* fc : test) xs.push_back(vectorize(*fc, fm.dictionary));
    std::vector<PredictionDistribution> preds = fm.model.predict_all(xs);
    for (std::size_t i = 0; i < test.size(); ++i) {
      preds[i].fragment_ids = {test[i]->fragment_id};
      rows.push_back({test[i], fold, std::move(preds[i])});
    }
  }
  std::sort(rows.begin(), rows.end(),
            [](const Row& a, const Row& b) { return a.counts->fragment_id < b.counts->fragment_id; });
  for (Row& r : rows) {
    result.truth.push_back(r.counts->author_key);
    result.folds.push_back(r.fold);
    result.predictions.push_back(std::move(r.prediction));
  }
  return result;
}

ValidationResult cross_validate(const Corpus& c, const FoldPlan& plan, const ForestConfig& cfg) {
  const std::vector<FragmentCounts> counts = extract_all(c.fragments);
  return cross_validate(counts, plan, cfg);
}

double two_class_task(std::span<const FragmentCounts> counts, const std::string& a, const std::string& b,
                      const ForestConfig& cfg, const FoldPlan& plan) {
  if (a == b) throw DataError("two-class task needs two different authors");
  std::vector<FragmentCounts> pair;
  for (const FragmentCounts& fc : counts) {
    if (fc.author_key == a || fc.author_key == b) pair.push_back(fc);
  }
  const auto has = [&](const std::string& who) {
    return std::any_of(pair.begin(), pair.end(), [&](const FragmentCounts& fc) { return fc.author_key == who; });
  };
  if (!has(a) || !has(b)) throw DataError("two-class task: author not in corpus");
  return cross_validate(pair, plan, cfg).accuracy();
}

double verification_task(std::span<const FragmentCounts> counts, const std::string& a, const ForestConfig& cfg,
                         const FoldPlan& plan) {
  std::vector<FragmentCounts> relabeled(counts.begin(), counts.end());
  bool found = false;
  for (FragmentCounts& fc : relabeled) {
    if (fc.author_key == a) {
      found = true;
    } else {
      fc.author_key = std::string(kComplementLabel);
    }
  }
  if (!found) throw DataError("verification task: author not in corpus: " + a);
  return cross_validate(relabeled, plan, cfg).accuracy();
}

}  // namespace blamestyle
