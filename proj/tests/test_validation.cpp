#include <gtest/gtest.h>

#include <set>

#include "blamestyle/error.hpp"
#include "blamestyle/synthetic.hpp"
#include "blamestyle/validation.hpp"

using namespace blamestyle;

namespace {

const Corpus& small_corpus() {
  static const Corpus c = [] {
    SyntheticOptions opt;
    opt.authors = 4;
    opt.fragments_per_author = 30;
    return generate_synthetic_corpus(opt);
  }();
  return c;
}

ForestConfig small_forest() {
  ForestConfig cfg;
  cfg.n_trees = 10;
  cfg.seed = 3;
  return cfg;
}

}  // namespace

TEST(CrossValidate, EveryFragmentPredictedOnceByItsFold) {
  const Corpus& c = small_corpus();
  const FoldPlan plan = stratified_folds(c, 5, 1);
  const ValidationResult r = cross_validate(c, plan, small_forest());
  ASSERT_EQ(r.size(), c.size());
  std::set<std::string> seen;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const std::string& id = r.predictions[i].fragment_ids.front();
    EXPECT_TRUE(seen.insert(id).second);
    EXPECT_EQ(r.folds[i], plan.fold_of(id));
    if (i > 0) {
      EXPECT_LT(r.predictions[i - 1].fragment_ids.front(), id);
    }
  }
  EXPECT_EQ(*r.classes, std::vector<std::string>(c.authors.begin(), c.authors.end()));
  EXPECT_GT(r.accuracy(), 1.0 / 4.0);
}

TEST(CrossValidate, Deterministic) {
  const Corpus& c = small_corpus();
  const FoldPlan plan = stratified_folds(c, 3, 2);
  const ValidationResult a = cross_validate(c, plan, small_forest());
  const ValidationResult b = cross_validate(c, plan, small_forest());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.predictions[i].probs, b.predictions[i].probs);
}

TEST(CrossValidate, ExtraFragmentsPredictedOnce) {
  const Corpus& c = small_corpus();
  const auto counts = extract_all(c.fragments);
  std::vector<FragmentCounts> pool;
  std::vector<FragmentCounts> extra;
  const std::string outsider = *c.authors.begin();
  for (const auto& fc : counts) (fc.author_key == outsider ? extra : pool).push_back(fc);
  std::vector<std::size_t> extra_folds;
  for (std::size_t i = 0; i < extra.size(); ++i) extra_folds.push_back(i % 3);
  const FoldPlan plan = stratified_folds(restrict_to_authors(c, {std::next(c.authors.begin()), c.authors.end()}), 3, 4);
  const ValidationResult r = cross_validate(pool, plan, small_forest(), extra, extra_folds);
  EXPECT_EQ(r.size(), counts.size());
  EXPECT_EQ(r.classes->size(), 3u);
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r.truth[i] == outsider) {
      EXPECT_FALSE(r.correct(i));
    }
  }
  std::vector<std::size_t> bad_folds(extra.size(), 7);
  EXPECT_THROW(cross_validate(pool, plan, small_forest(), extra, bad_folds), DataError);
}

TEST(CrossValidate, FoldSeedsDiffer) {
  EXPECT_NE(fold_seed(1, 0), fold_seed(1, 1));
  EXPECT_EQ(fold_seed(1, 0), fold_seed(1, 0));
}

TEST(SpecialTasks, TwoClassAndVerification) {
  const Corpus& c = small_corpus();
  const auto counts = extract_all(c.fragments);
  const FoldPlan plan = stratified_folds(c, 3, 5);
  const std::vector<std::string> a(c.authors.begin(), c.authors.end());
  const double two = two_class_task(counts, a[0], a[1], small_forest(), plan);
  EXPECT_GE(two, 0.0);
  EXPECT_LE(two, 1.0);
  const double ver = verification_task(counts, a[0], small_forest(), plan);
  EXPECT_GE(ver, 0.5);  // the majority class alone scores 0.75
  EXPECT_THROW(two_class_task(counts, a[0], a[0], small_forest(), plan), DataError);
  EXPECT_THROW(verification_task(counts, "nobody", small_forest(), plan), DataError);
}
