#include "blamestyle/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "blamestyle/error.hpp"

namespace blamestyle {

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Correct:
      return "correct";
    case Outcome::IncorrectInWorld:
      return "incorrect";
    case Outcome::OutOfWorld:
      return "out_of_world";
  }
  return "unknown";
}

std::size_t calibration_bin(double confidence) {
  if (!(confidence >= 0.0 && confidence <= 1.0)) throw DataError("confidence outside [0, 1]");
  return std::min<std::size_t>(static_cast<std::size_t>(std::floor(confidence * 10.0)), kCalibrationBins - 1);
}

CalibrationCurve build_calibration_curve(std::span<const AttributionRecord> records) {
  if (records.empty()) throw DataError("calibration curve needs at least one record");
  CalibrationCurve curve;
  for (std::size_t b = 0; b < kCalibrationBins; ++b) curve.bins[b].lower = static_cast<double>(b) / 10.0;
  for (const AttributionRecord& r : records) {
    CalibrationBin& bin = curve.bins[calibration_bin(r.confidence)];
    switch (r.outcome) {
      case Outcome::Correct:
        ++bin.correct;
        break;
      case Outcome::IncorrectInWorld:
        ++bin.incorrect;
        break;
      case Outcome::OutOfWorld:
        ++bin.out_of_world;
        break;
    }
  }
  for (CalibrationBin& bin : curve.bins) {
    if (bin.correct + bin.incorrect > 0) {
      bin.accuracy = static_cast<double>(bin.correct) / static_cast<double>(bin.correct + bin.incorrect);
    }
  }
  curve.total = records.size();
  return curve;
}

double f1_score(double precision, double recall) {
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

CriterionMetrics criterion(std::size_t hits, std::size_t selected, std::size_t positives) {
  CriterionMetrics m;
  m.precision = ratio(hits, selected);
  m.recall = ratio(hits, positives);
  if (m.precision && m.recall) m.f1 = f1_score(*m.precision, *m.recall);
  return m;
}

}  // namespace

ThresholdMetrics threshold_metrics(std::span<const AttributionRecord> records, double t) {
  std::size_t above = 0;
  std::size_t below = 0;
  std::size_t correct = 0;
  std::size_t correct_above = 0;
  std::size_t oow = 0;
  std::size_t oow_below = 0;
  std::size_t wrong = 0;  // out of world or incorrect
  std::size_t wrong_below = 0;
  for (const AttributionRecord& r : records) {
    const bool is_above = r.confidence >= t;
    (is_above ? above : below) += 1;
    if (r.outcome == Outcome::Correct) {
      ++correct;
      correct_above += is_above ? 1 : 0;
    } else {
      ++wrong;
      wrong_below += is_above ? 0 : 1;
      if (r.outcome == Outcome::OutOfWorld) {
        ++oow;
        oow_below += is_above ? 0 : 1;
      }
    }
  }
  ThresholdMetrics m;
  m.threshold = t;
  m.criteria[0] = criterion(correct_above, above, correct);
  m.criteria[1] = criterion(oow_below, below, oow);
  m.criteria[2] = criterion(wrong_below, below, wrong);
  return m;
}

MetricsSweep metrics_sweep(std::span<const AttributionRecord> records) {
  MetricsSweep sweep;
  std::array<double, 3> best_f1 = {-1.0, -1.0, -1.0};
  for (int i = 0; i <= 10; ++i) {
    const double t = static_cast<double>(i) / 10.0;
    ThresholdMetrics m = threshold_metrics(records, t);
    for (std::size_t c = 0; c < 3; ++c) {
      if (m.criteria[c].f1 && *m.criteria[c].f1 > best_f1[c]) {
        best_f1[c] = *m.criteria[c].f1;
        sweep.best_threshold[c] = t;
      }
    }
    sweep.rows.push_back(std::move(m));
  }
  return sweep;
}

std::vector<RocPoint> roc_points(std::span<const AttributionRecord> records) {
  std::vector<double> thresholds = {0.0};
  double max_conf = 0.0;
  for (const AttributionRecord& r : records) {
    thresholds.push_back(r.confidence);
    max_conf = std::max(max_conf, r.confidence);
  }
  thresholds.push_back(std::nextafter(max_conf, 2.0));
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  std::size_t positives = 0;
  std::size_t negatives = 0;
  for (const AttributionRecord& r : records) (r.outcome == Outcome::Correct ? negatives : positives) += 1;

  std::vector<RocPoint> points;
  for (double t : thresholds) {
    std::size_t tp = 0;
    std::size_t fp = 0;
    for (const AttributionRecord& r : records) {
      if (r.confidence < t) (r.outcome == Outcome::Correct ? fp : tp) += 1;
    }
    RocPoint p;
    p.threshold = t;
    p.tpr = positives == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(positives);
    p.fpr = negatives == 0 ? 0.0 : static_cast<double>(fp) / static_cast<double>(negatives);
    points.push_back(p);
  }
  return points;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

}  // namespace

void write_calibration_csv(std::ostream& os, const CalibrationCurve& curve) {
  os << "bin_lower,correct,incorrect,out_of_world,accuracy,percent_of_samples\n";
  for (const CalibrationBin& b : curve.bins) {
    const double pct = curve.total == 0 ? 0.0 : 100.0 * static_cast<double>(b.total()) / static_cast<double>(curve.total);
    os << fmt(b.lower).substr(0, 3) << ',' << b.correct << ',' << b.incorrect << ',' << b.out_of_world << ','
       << fmt(b.accuracy) << ',' << fmt(pct) << '\n';
  }
}

void write_thresholds_csv(std::ostream& os, const MetricsSweep& sweep) {
  os << "threshold,criterion,precision,recall,f1\n";
  for (const ThresholdMetrics& m : sweep.rows) {
    for (std::size_t c = 0; c < 3; ++c) {
      os << fmt(m.threshold).substr(0, 3) << ',' << c + 1 << ',' << fmt(m.criteria[c].precision) << ','
         << fmt(m.criteria[c].recall) << ',' << fmt(m.criteria[c].f1) << '\n';
    }
  }
}

void write_roc_csv(std::ostream& os, std::span<const RocPoint> points) {
  os << "threshold,fpr,tpr\n";
  char buf[40];
  for (const RocPoint& p : points) {
    std::snprintf(buf, sizeof buf, "%.17g", p.threshold);
    os << buf << ',' << fmt(p.fpr) << ',' << fmt(p.tpr) << '\n';
  }
}

void write_records_csv(std::ostream& os, std::span<const AttributionRecord> records) {
  os << "id,confidence,outcome\n";
  for (const AttributionRecord& r : records) os << r.id << ',' << fmt(r.confidence) << ',' << to_string(r.outcome) << '\n';
}

}  // namespace blamestyle
