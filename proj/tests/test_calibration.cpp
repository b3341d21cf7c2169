#include <gtest/gtest.h>

#include <sstream>

#include "blamestyle/calibration.hpp"
#include "blamestyle/error.hpp"
#include "blamestyle/random.hpp"

using namespace blamestyle;

namespace {

std::vector<AttributionRecord> random_records(Rng& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<AttributionRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    AttributionRecord r;
    r.id = std::to_string(i);
    r.confidence = std::round(u(rng) * 20.0) / 20.0;
    r.outcome = static_cast<Outcome>(rng() % 3);
    out.push_back(r);
  }
  return out;
}

}  // namespace

TEST(F1, KnownValues) {
  EXPECT_NEAR(f1_score(0.872, 0.989), 0.927, 1e-3);
  EXPECT_NEAR(f1_score(0.610, 0.428), 0.503, 1e-3);
  EXPECT_NEAR(f1_score(0.908, 0.976), 0.941, 1e-3);
  EXPECT_DOUBLE_EQ(f1_score(0.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(f1_score(1.0, 1.0), 1.0);
}

TEST(Bins, Edges) {
  EXPECT_EQ(calibration_bin(0.0), 0u);
  EXPECT_EQ(calibration_bin(0.0999), 0u);
  EXPECT_EQ(calibration_bin(0.1), 1u);
  EXPECT_EQ(calibration_bin(0.95), 9u);
  EXPECT_EQ(calibration_bin(1.0), 9u);
  EXPECT_THROW(calibration_bin(1.01), DataError);
  EXPECT_THROW(calibration_bin(-0.1), DataError);
}

TEST(Curve, CountsPartitionRecords) {
  Rng rng = make_rng(8);
  const auto recs = random_records(rng, 500);
  const CalibrationCurve c = build_calibration_curve(recs);
  std::size_t total = 0;
  for (const auto& b : c.bins) {
    total += b.total();
    if (b.correct + b.incorrect == 0) {
      EXPECT_FALSE(b.accuracy.has_value());
    } else {
      EXPECT_DOUBLE_EQ(*b.accuracy, static_cast<double>(b.correct) / static_cast<double>(b.correct + b.incorrect));
    }
  }
  EXPECT_EQ(total, recs.size());
  EXPECT_THROW(build_calibration_curve(std::vector<AttributionRecord>{}), DataError);
}

TEST(Curve, CsvFormat) {
  const std::vector<AttributionRecord> recs = {{"a", 0.95, Outcome::Correct}, {"b", 0.15, Outcome::OutOfWorld}};
  std::ostringstream os;
  write_calibration_csv(os, build_calibration_curve(recs));
  const std::string s = os.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "bin_lower,correct,incorrect,out_of_world,accuracy,percent_of_samples");
  EXPECT_NE(s.find("\n0.9,1,0,0,1.000000,50.000000\n"), std::string::npos);
  EXPECT_NE(s.find("\n0.1,0,0,1,,50.000000\n"), std::string::npos);
}

// Oracle: recount each criterion by brute force.
TEST(Thresholds, MatchBruteForce) {
  Rng rng = make_rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    const auto recs = random_records(rng, 1 + rng() % 60);
    for (double t : {0.0, 0.3, 0.5, 0.75, 1.0}) {
      const ThresholdMetrics m = threshold_metrics(recs, t);
      const auto check = [&](Criterion c, auto positive, bool select_above) {
        std::size_t tp = 0, sel = 0, pos = 0;
        for (const auto& r : recs) {
          const bool s = select_above ? r.confidence >= t : r.confidence < t;
          sel += s;
          pos += positive(r);
          tp += s && positive(r);
        }
        const CriterionMetrics& cm = m.at(c);
        if (sel == 0) {
          EXPECT_FALSE(cm.precision.has_value());
        } else {
          EXPECT_DOUBLE_EQ(*cm.precision, static_cast<double>(tp) / static_cast<double>(sel));
        }
        if (pos == 0) {
          EXPECT_FALSE(cm.recall.has_value());
        } else {
          EXPECT_DOUBLE_EQ(*cm.recall, static_cast<double>(tp) / static_cast<double>(pos));
        }
        EXPECT_EQ(cm.f1.has_value(), cm.precision.has_value() && cm.recall.has_value());
      };
      check(Criterion::CorrectAbove, [](const AttributionRecord& r) { return r.outcome == Outcome::Correct; }, true);
      check(Criterion::OutOfWorldBelow, [](const AttributionRecord& r) { return r.outcome == Outcome::OutOfWorld; }, false);
      check(Criterion::OutOfWorldOrIncorrectBelow, [](const AttributionRecord& r) { return r.outcome != Outcome::Correct; },
            false);
    }
  }
}

TEST(Thresholds, SweepGridAndBest) {
  const std::vector<AttributionRecord> recs = {{"a", 0.9, Outcome::Correct}, {"b", 0.8, Outcome::Correct},
                                               {"c", 0.2, Outcome::OutOfWorld}, {"d", 0.35, Outcome::IncorrectInWorld}};
  const MetricsSweep s = metrics_sweep(recs);
  ASSERT_EQ(s.rows.size(), 11u);
  EXPECT_DOUBLE_EQ(s.rows[4].threshold, 0.4);
  ASSERT_TRUE(s.best_threshold[0].has_value());
  EXPECT_NEAR(*s.best_threshold[0], 0.4, 1e-12);  // first threshold reaching F1 = 1
  EXPECT_NEAR(*s.best_threshold[2], 0.4, 1e-12);
  std::ostringstream os;
  write_thresholds_csv(os, s);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "threshold,criterion,precision,recall,f1");
}

TEST(Roc, EndpointsAndMonotone) {
  Rng rng = make_rng(10);
  const auto recs = random_records(rng, 200);
  const auto pts = roc_points(recs);
  EXPECT_DOUBLE_EQ(pts.front().tpr, 0.0);
  EXPECT_DOUBLE_EQ(pts.front().fpr, 0.0);
  EXPECT_DOUBLE_EQ(pts.back().tpr, 1.0);
  EXPECT_DOUBLE_EQ(pts.back().fpr, 1.0);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    EXPECT_GT(pts[i].threshold, pts[i - 1].threshold);
    EXPECT_GE(pts[i].tpr, pts[i - 1].tpr);
    EXPECT_GE(pts[i].fpr, pts[i - 1].fpr);
  }
  std::ostringstream os;
  write_roc_csv(os, pts);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "threshold,fpr,tpr");
}
