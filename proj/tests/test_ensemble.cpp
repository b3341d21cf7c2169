#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "blamestyle/ensemble.hpp"
#include "blamestyle/error.hpp"
#include "blamestyle/random.hpp"

using namespace blamestyle;

namespace {

ClassList abc() { return std::make_shared<const std::vector<std::string>>(std::vector<std::string>{"a", "b", "c"}); }

PredictionDistribution dist(std::vector<double> probs, const std::string& id, ClassList classes = abc()) {
  PredictionDistribution p;
  p.probs = std::move(probs);
  p.fragment_ids = {id};
  p.classes = std::move(classes);
  return p;
}

std::vector<std::string> ids(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("f" + std::to_string(100 + i));
  return out;
}

}  // namespace

TEST(GroupSamples, OrderedChunksDropTail) {
  const auto g = group_samples(ids(7), "a", {3, MergeOrder::Ordered, 0});
  ASSERT_EQ(g.size(), 2u);
  EXPECT_EQ(g[0].fragment_ids, (std::vector<std::string>{"f100", "f101", "f102"}));
  EXPECT_EQ(g[1].group_id, "a#1");
  EXPECT_EQ(g[1].truth, "a");
}

TEST(GroupSamples, RandomIsSeededPermutation) {
  const auto all = ids(12);
  const auto g1 = group_samples(all, "a", {4, MergeOrder::Random, 5});
  const auto g2 = group_samples(all, "a", {4, MergeOrder::Random, 5});
  std::set<std::string> seen;
  for (std::size_t i = 0; i < g1.size(); ++i) {
    EXPECT_EQ(g1[i].fragment_ids, g2[i].fragment_ids);
    seen.insert(g1[i].fragment_ids.begin(), g1[i].fragment_ids.end());
  }
  EXPECT_EQ(seen.size(), 12u);
  EXPECT_THROW(group_samples(all, "a", {0, MergeOrder::Ordered, 0}), DataError);
}

TEST(Average, ElementwiseMeanAndValidity) {
  const std::vector<PredictionDistribution> ds = {dist({1.0, 0.0, 0.0}, "x"), dist({0.2, 0.6, 0.2}, "y")};
  const PredictionDistribution avg = average_distributions(ds);
  EXPECT_DOUBLE_EQ(avg.probs[0], 0.6);
  EXPECT_DOUBLE_EQ(avg.probs[1], 0.3);
  EXPECT_EQ(avg.fragment_ids, (std::vector<std::string>{"x", "y"}));
}

TEST(Average, RandomDistributionsStayDistributions) {
  Rng rng = make_rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<PredictionDistribution> ds;
    const std::size_t n = 1 + rng() % 10;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> p = {u(rng), u(rng), u(rng)};
      const double s = p[0] + p[1] + p[2];
      for (double& x : p) x /= s;
      ds.push_back(dist(p, std::to_string(i)));
    }
    const auto avg = average_distributions(ds);
    EXPECT_NEAR(avg.probs[0] + avg.probs[1] + avg.probs[2], 1.0, 1e-12);
    for (std::size_t k = 0; k < 3; ++k) {
      double lo = 1.0, hi = 0.0;
      for (const auto& d : ds) {
        lo = std::min(lo, d.probs[k]);
        hi = std::max(hi, d.probs[k]);
      }
      EXPECT_GE(avg.probs[k], lo - 1e-12);
      EXPECT_LE(avg.probs[k], hi + 1e-12);
    }
  }
}

TEST(Average, RejectsMismatchedClasses) {
  const auto other = std::make_shared<const std::vector<std::string>>(std::vector<std::string>{"a", "b", "z"});
  const std::vector<PredictionDistribution> ds = {dist({1, 0, 0}, "x"), dist({1, 0, 0}, "y", other)};
  EXPECT_THROW(average_distributions(ds), DataError);
  EXPECT_THROW(average_distributions(std::vector<PredictionDistribution>{}), DataError);
}

TEST(Aggregate, GroupsWithinFoldAndAuthor) {
  ValidationResult r;
  r.classes = abc();
  // Author a: 4 fragments in fold 0; two weak-wrong and two strong-right.
  const std::vector<std::vector<double>> probs = {{0.4, 0.6, 0.0}, {0.4, 0.6, 0.0}, {0.9, 0.1, 0.0}, {0.9, 0.1, 0.0}};
  for (std::size_t i = 0; i < probs.size(); ++i) {
    r.predictions.push_back(dist(probs[i], "id" + std::to_string(i)));
    r.truth.push_back("a");
    r.folds.push_back(0);
  }
  std::vector<SampleGroup> formed;
  const auto g4 = aggregate_predictions(r, {4, MergeOrder::Ordered, 0}, &formed);
  ASSERT_EQ(g4.size(), 1u);
  EXPECT_TRUE(g4[0].correct());
  EXPECT_NEAR(g4[0].confidence, 0.65, 1e-12);
  EXPECT_EQ(g4[0].group_id, "a@0#0");
  EXPECT_EQ(formed.size(), 1u);
  EXPECT_DOUBLE_EQ(group_accuracy(aggregate_predictions(r, {1, MergeOrder::Ordered, 0})), r.accuracy());
  try {
    aggregate_predictions(r, {3, MergeOrder::Ordered, 0});
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("must divide"), std::string::npos);
  }
}

TEST(GroupCsv, Header) {
  GroupAttribution g{"a#0", "a", "b", 0.5, 3};
  std::ostringstream os;
  write_group_attributions(os, std::vector<GroupAttribution>{g});
  EXPECT_EQ(os.str(), "group_id,truth,predicted,confidence,group_size\na#0,a,b,0.500000,3\n");
}

TEST(MergeVectors, SumAndAverage) {
  SparseFeatureVector a, b;
  a.dimension = b.dimension = 4;
  a.entries = {{0, 1.0}, {2, 2.0}};
  b.entries = {{2, 4.0}, {3, 1.0}};
  const std::vector<SparseFeatureVector> vs = {a, b};
  const auto sum = merge_vectors(vs, MergeNormalization::Sum);
  EXPECT_EQ(sum.entries, (std::vector<std::pair<std::uint32_t, double>>{{0, 1.0}, {2, 6.0}, {3, 1.0}}));
  const auto avg = merge_vectors(vs, MergeNormalization::Average);
  EXPECT_DOUBLE_EQ(avg.value(2), 3.0);
  EXPECT_GE(avg.nonzero(), std::max(a.nonzero(), b.nonzero()));
  b.dimension = 5;
  EXPECT_THROW(merge_vectors(std::vector<SparseFeatureVector>{a, b}, MergeNormalization::Sum), DataError);
}

TEST(CoefficientOfVariation, PopulationSdOverMean) {
  const std::vector<PredictionDistribution> ds = {dist({0.2, 0.8, 0.0}, "x"), dist({0.6, 0.4, 0.0}, "y")};
  const auto cv = coefficient_of_variation(ds);
  ASSERT_EQ(cv.size(), 3u);
  EXPECT_NEAR(*cv[0], 0.2 / 0.4, 1e-12);
  EXPECT_NEAR(*cv[1], 0.2 / 0.6, 1e-12);
  EXPECT_FALSE(cv[2].has_value());
  EXPECT_THROW(coefficient_of_variation(std::vector<PredictionDistribution>{ds[0]}), DataError);
}
