#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace blamestyle {

enum class Outcome : std::uint8_t { Correct, IncorrectInWorld, OutOfWorld };

std::string_view to_string(Outcome o);

struct AttributionRecord {
  std::string id;
  double confidence = 0.0;
  Outcome outcome = Outcome::Correct;
};

inline constexpr std::size_t kCalibrationBins = 10;

struct CalibrationBin {
  double lower = 0.0;
  std::size_t correct = 0;
  std::size_t incorrect = 0;
  std::size_t out_of_world = 0;
  std::optional<double> accuracy;  // correct / (correct + incorrect)

  std::size_t total() const { return correct + incorrect + out_of_world; }
};

struct CalibrationCurve {
  std::array<CalibrationBin, kCalibrationBins> bins;
  std::size_t total = 0;
};

/// Bin index floor(10 c), with c = 1 in the top bin.
std::size_t calibration_bin(double confidence);
/// Throws DataError on an empty record list or a confidence outside [0, 1].
CalibrationCurve build_calibration_curve(std::span<const AttributionRecord> records);

/// Harmonic mean of precision and recall; 0 when both are 0.
double f1_score(double precision, double recall);

enum class Criterion : std::uint8_t {
  CorrectAbove = 1,             // positives: correct, selected: confidence >= t
  OutOfWorldBelow = 2,          // positives: out of world, selected: confidence < t
  OutOfWorldOrIncorrectBelow = 3,
};

struct CriterionMetrics {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;  // absent unless both precision and recall are defined
};

struct ThresholdMetrics {
  double threshold = 0.0;
  std::array<CriterionMetrics, 3> criteria;  // indexed by criterion - 1

  const CriterionMetrics& at(Criterion c) const { return criteria[static_cast<std::size_t>(c) - 1]; }
};

ThresholdMetrics threshold_metrics(std::span<const AttributionRecord> records, double t);

struct MetricsSweep {
  std::vector<ThresholdMetrics> rows;  // t = 0.0, 0.1, ..., 1.0
  std::array<std::optional<double>, 3> best_threshold;  // argmax F1 per criterion, first on ties
};

MetricsSweep metrics_sweep(std::span<const AttributionRecord> records);

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

/// Positives are false attributions, flagged when confidence < t. Thresholds:
/// 0, every distinct confidence, and one just above the maximum.
std::vector<RocPoint> roc_points(std::span<const AttributionRecord> records);

void write_calibration_csv(std::ostream& os, const CalibrationCurve& curve);
void write_thresholds_csv(std::ostream& os, const MetricsSweep& sweep);
void write_roc_csv(std::ostream& os, std::span<const RocPoint> points);
/// `id,confidence,outcome`.
void write_records_csv(std::ostream& os, std::span<const AttributionRecord> records);

}  // namespace blamestyle
