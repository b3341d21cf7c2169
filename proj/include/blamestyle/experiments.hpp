#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "blamestyle/calibration.hpp"
#include "blamestyle/corpus.hpp"
#include "blamestyle/ensemble.hpp"
#include "blamestyle/forest.hpp"
#include "blamestyle/validation.hpp"

namespace blamestyle {

/// Everything an experiment emits. Files are kept in memory (relative path ->
/// content) and written together with the manifest by write_report.
struct ExperimentReport {
  std::string name;
  std::vector<std::pair<std::string, std::string>> config;  // echoed into the manifest
  std::vector<std::string> summary_header;
  std::vector<std::vector<std::string>> summary_rows;
  std::map<std::string, std::string> files;
  std::vector<std::pair<std::string, double>> timings;  // seconds, kept out of the manifest

  std::string summary_csv() const;
};

/// Writes `<out>/<name>/` with every file, summary.csv, timings.csv and
/// manifest.json (config plus SHA-256 of each file except timings.csv).
/// Returns the experiment directory.
std::filesystem::path write_report(const std::filesystem::path& out, const ExperimentReport& report);

std::string sha256_hex(std::string_view data);
std::string format_fixed(double v, int digits = 6);
void echo_forest_config(ExperimentReport& r, const ForestConfig& cfg);

/// `fragment_id,truth,predicted,confidence,fold,correct`.
std::string predictions_csv(const ValidationResult& r);

struct AttributionSweepRow {
  std::uint64_t seed = 0;
  std::size_t group_size = 0;
  std::size_t groups = 0;
  double accuracy = 0.0;
};

struct CovDiagnostic {
  std::size_t group_size = 0;
  std::size_t correct_groups = 0;
  std::size_t truth_minimal = 0;  // correct groups whose truth class has the smallest CoV
};

struct AttributionSweepResult {
  ExperimentReport report;
  std::vector<AttributionSweepRow> rows;
  std::map<std::size_t, double> mean_accuracy;  // group size -> mean over seeds
  std::map<std::uint64_t, std::vector<AttributionRecord>> single_records;  // per seed, closed world
  std::vector<CovDiagnostic> cov;
};

/// One cross-validation per seed, then aggregation of the out-of-fold
/// distributions for every group size.
AttributionSweepResult run_attribution_sweep(const Corpus& c, const ForestConfig& cfg,
                                             std::span<const std::size_t> group_sizes, std::size_t folds,
                                             std::span<const std::uint64_t> seeds,
                                             MergeOrder mode = MergeOrder::Ordered);

struct OpenWorldSetting {
  std::size_t round = 0;
  std::size_t group_size = 1;
  std::vector<AttributionRecord> records;
  MetricsSweep sweep;
};

struct OpenWorldResult {
  ExperimentReport report;
  std::vector<OpenWorldSetting> settings;
};

/// Per round: suspects are cross-validated, and each unknown-author fragment
/// is predicted once by one fold model. Unknown fragments are dealt to folds
/// round-robin per author after a seeded shuffle.
OpenWorldResult run_open_world_rounds(const Corpus& c, std::size_t n_unknown, const ForestConfig& cfg,
                                      std::size_t folds, std::span<const std::size_t> group_sizes,
                                      std::uint64_t seed);

struct SizeSetting {
  std::size_t min_loc = 1;
  std::size_t samples_per_author = 10;
  std::optional<std::size_t> max_loc;  // set to min_loc for single-LOC subsets
};

struct SizeSweepRow {
  SizeSetting setting;
  std::size_t authors = 0;
  std::size_t fragments = 0;
  std::optional<double> accuracy;  // absent when skipped
  std::string status;
};

struct SizeSweepResult {
  ExperimentReport report;
  std::vector<SizeSweepRow> rows;
};

/// Filter, balance and cross-validate per setting. Settings that leave fewer
/// than two authors or fewer samples than folds are reported as skipped.
SizeSweepResult run_size_sweep(const Corpus& c, std::span<const SizeSetting> settings, const ForestConfig& cfg,
                               std::size_t folds, std::uint64_t seed);

struct CorruptionRow {
  std::size_t swaps = 0;
  double corrupted_fraction = 0.0;  // 2m / N
  double accuracy = 0.0;            // against the original labels
};

struct CorruptionSweepResult {
  ExperimentReport report;
  std::vector<CorruptionRow> rows;
};

/// Same folds for every m; training uses corrupted labels, scoring the originals.
CorruptionSweepResult run_corruption_sweep(const Corpus& c, std::span<const std::size_t> m_values,
                                           const ForestConfig& cfg, std::size_t folds, std::uint64_t seed);

struct PseudoFComponents {
  double between = 0.0;   // sum_c n_c (mean_c - mean)^2 / N
  double residual = 0.0;  // sum_c n_c var_c / N, population variances
  std::size_t n = 0;
};

/// Throws DataError with fewer than two classes or an empty class.
PseudoFComponents pseudo_f_components(std::span<const std::vector<double>> values_per_class);
/// between / residual; absent when the residual is 0.
std::optional<double> pseudo_f_statistic(std::span<const std::vector<double>> values_per_class);

/// Linear interpolation between order statistics (R type 7). `sorted` must be ascending and nonempty.
double quantile(std::span<const double> sorted, double q);

struct PseudoFRow {
  std::size_t merge_size = 0;
  std::size_t features = 0;  // features with a defined statistic
  std::array<double, 5> quantiles{};  // 0, 25, 50, 75, 100
  double mean_nonzero = 0.0;          // per merged vector
};

struct PseudoFTable {
  std::vector<PseudoFRow> rows;
  std::size_t top_quartile_overlap = 0;  // features in the top quartile at every merge size
};

/// For each merge size, average-merges consecutive runs of each class's
/// vectors (dropping ragged tails) and computes a per-feature pseudo-F.
PseudoFTable pseudo_f_table(const std::map<std::string, std::vector<SparseFeatureVector>>& vectors_by_class,
                            std::span<const std::size_t> merge_sizes);

struct AnalysisResult {
  ExperimentReport report;
  PseudoFTable table;
  SparsityReport unmerged;
};

/// Sparsity and pseudo-F over a dictionary fit on the whole corpus; each
/// author's fragments are merged in fragment-id order.
AnalysisResult run_analysis(const Corpus& c, std::span<const std::size_t> merge_sizes);

struct SpecialCaseSummary {
  std::string task;
  double average = 0.0;
  double minimum = 0.0;
  double maximum = 0.0;
  std::size_t runs = 0;
};

struct SpecialCaseResult {
  ExperimentReport report;
  std::vector<SpecialCaseSummary> tasks;  // two-class, verification
};

/// Two-class attribution for every author pair and verification for every author.
SpecialCaseResult run_special_cases(const Corpus& c, const ForestConfig& cfg, std::size_t folds, std::uint64_t seed);

/// Merged-sample combinations for one group size.
ExperimentReport run_merge_experiment(const Corpus& c, const ForestConfig& cfg, std::size_t group_size,
                                      std::size_t folds, MergeOrder mode, std::uint64_t seed);

}  // namespace blamestyle
