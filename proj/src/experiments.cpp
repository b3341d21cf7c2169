#include "blamestyle/experiments.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>

#include "blamestyle/error.hpp"
#include "blamestyle/features.hpp"
#include "blamestyle/random.hpp"

namespace blamestyle {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string join_sizes(std::span<const std::size_t> v) {
  std::string out;
  for (std::size_t x : v) out += (out.empty() ? "" : " ") + std::to_string(x);
  return out;
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::binary);
  if (!os) throw Error("cannot write " + p.string());
  os << content;
  if (!os) throw Error("failed writing " + p.string());
}

template <typename F>
std::string render(F&& f) {
  std::ostringstream os;
  f(os);
  return os.str();
}

std::vector<FragmentCounts> counts_of_authors(std::span<const FragmentCounts> counts, const std::set<std::string>& who) {
  std::vector<FragmentCounts> out;
  for (const FragmentCounts& fc : counts) {
    if (who.contains(fc.author_key)) out.push_back(fc);
  }
  return out;
}

}  // namespace

std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) throw Error("SHA-256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 15];
  }
  return out;
}

std::string ExperimentReport::summary_csv() const {
  std::string out;
  for (std::size_t i = 0; i < summary_header.size(); ++i) out += (i ? "," : "") + csv_field(summary_header[i]);
  out += '\n';
  for (const auto& row : summary_rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_field(row[i]);
    out += '\n';
  }
  return out;
}

std::filesystem::path write_report(const std::filesystem::path& out, const ExperimentReport& report) {
  if (report.name.empty()) throw Error("experiment report without a name");
  const std::filesystem::path dir = out / report.name;
  std::filesystem::create_directories(dir);

  std::map<std::string, std::string> files = report.files;
  files["summary.csv"] = report.summary_csv();
  for (const auto& [rel, content] : files) write_file(dir / rel, content);

  std::string timings = "step,seconds\n";
  for (const auto& [step, s] : report.timings) timings += csv_field(step) + "," + format_fixed(s, 3) + "\n";
  write_file(dir / "timings.csv", timings);

  nlohmann::ordered_json manifest;
  manifest["experiment"] = report.name;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.config) config[k] = v;
  manifest["config"] = config;
  nlohmann::ordered_json hashes = nlohmann::ordered_json::array();
  for (const auto& [rel, content] : files) {
    hashes.push_back({{"path", rel}, {"sha256", sha256_hex(content)}, {"bytes", content.size()}});
  }
  manifest["files"] = hashes;
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  return dir;
}

void echo_forest_config(ExperimentReport& r, const ForestConfig& cfg) {
  r.config.emplace_back("trees", std::to_string(cfg.n_trees));
  r.config.emplace_back("max_depth", std::to_string(cfg.max_depth));
  r.config.emplace_back("features_per_split", std::to_string(cfg.features_per_split));
  r.config.emplace_back("min_samples_leaf", std::to_string(cfg.min_samples_leaf));
  r.config.emplace_back("bootstrap", cfg.bootstrap ? "true" : "false");
}

std::string predictions_csv(const ValidationResult& r) {
  std::string out = "fragment_id,truth,predicted,confidence,fold,correct\n";
  for (std::size_t i = 0; i < r.size(); ++i) {
    out += csv_field(r.predictions[i].fragment_ids.front()) + "," + csv_field(r.truth[i]) + "," +
           csv_field(r.predictions[i].predicted()) + "," + format_fixed(r.predictions[i].confidence()) + "," +
           std::to_string(r.folds[i]) + "," + (r.correct(i) ? "1" : "0") + "\n";
  }
  return out;
}

namespace {

std::vector<AttributionRecord> records_of(const ValidationResult& r) {
  std::vector<AttributionRecord> out;
  out.reserve(r.size());
  const auto& classes = *r.classes;
  for (std::size_t i = 0; i < r.size(); ++i) {
    AttributionRecord rec;
    rec.id = r.predictions[i].fragment_ids.front();
    rec.confidence = r.predictions[i].confidence();
    if (!std::binary_search(classes.begin(), classes.end(), r.truth[i])) {
      rec.outcome = Outcome::OutOfWorld;
    } else {
      rec.outcome = r.correct(i) ? Outcome::Correct : Outcome::IncorrectInWorld;
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<AttributionRecord> records_of(std::span<const GroupAttribution> groups, const ClassList& classes) {
  std::vector<AttributionRecord> out;
  for (const GroupAttribution& g : groups) {
    AttributionRecord rec;
    rec.id = g.group_id;
    rec.confidence = g.confidence;
    if (!std::binary_search(classes->begin(), classes->end(), g.truth)) {
      rec.outcome = Outcome::OutOfWorld;
    } else {
      rec.outcome = g.correct() ? Outcome::Correct : Outcome::IncorrectInWorld;
    }
    out.push_back(std::move(rec));
  }
  return out;
}

const PredictionDistribution& prediction_for(const ValidationResult& r, const std::string& id) {
  const auto it = std::lower_bound(r.predictions.begin(), r.predictions.end(), id,
                                   [](const PredictionDistribution& p, const std::string& key) {
                                     return p.fragment_ids.front() < key;
                                   });
  if (it == r.predictions.end() || it->fragment_ids.front() != id) throw DataError("no prediction for " + id);
  return *it;
}

}  // namespace

AttributionSweepResult run_attribution_sweep(const Corpus& c, const ForestConfig& cfg,
                                             std::span<const std::size_t> group_sizes, std::size_t folds,
                                             std::span<const std::uint64_t> seeds, MergeOrder mode) {
  if (seeds.empty()) throw DataError("attribution sweep needs at least one seed");
  if (group_sizes.empty()) throw DataError("attribution sweep needs at least one group size");
  AttributionSweepResult out;
  ExperimentReport& rep = out.report;
  rep.name = "attribution";
  echo_forest_config(rep, cfg);
  rep.config.emplace_back("folds", std::to_string(folds));
  rep.config.emplace_back("group_sizes", join_sizes(group_sizes));
  std::string seed_list;
  for (std::uint64_t s : seeds) seed_list += (seed_list.empty() ? "" : " ") + std::to_string(s);
  rep.config.emplace_back("seeds", seed_list);
  rep.config.emplace_back("merge_order", mode == MergeOrder::Ordered ? "ordered" : "random");
  rep.config.emplace_back("fragments", std::to_string(c.size()));
  rep.config.emplace_back("authors", std::to_string(c.authors.size()));
  rep.summary_header = {"seed", "group_size", "groups", "accuracy"};

  auto t0 = Clock::now();
  const std::vector<FragmentCounts> counts = extract_all(c.fragments);
  rep.timings.emplace_back("extract", seconds_since(t0));

  std::map<std::size_t, CovDiagnostic> cov;
  for (std::uint64_t seed : seeds) {
    ForestConfig run_cfg = cfg;
    run_cfg.seed = seed;
    const FoldPlan plan = stratified_folds(c, folds, seed);
    t0 = Clock::now();
    const ValidationResult r = cross_validate(counts, plan, run_cfg);
    rep.timings.emplace_back("cv seed " + std::to_string(seed), seconds_since(t0));

    const std::string prefix = "seed" + std::to_string(seed) + "/";
    rep.files[prefix + "predictions.csv"] = predictions_csv(r);
    std::vector<AttributionRecord> recs = records_of(r);
    rep.files[prefix + "calibration.csv"] =
        render([&](std::ostream& os) { write_calibration_csv(os, build_calibration_curve(recs)); });
    out.single_records[seed] = std::move(recs);

    for (std::size_t g : group_sizes) {
      AttributionSweepRow row;
      row.seed = seed;
      row.group_size = g;
      if (g == 1) {
        row.groups = r.size();
        row.accuracy = r.accuracy();
      } else {
        GroupingSpec spec{g, mode, seed};
        std::vector<SampleGroup> formed;
        const std::vector<GroupAttribution> groups = aggregate_predictions(r, spec, &formed);
        row.groups = groups.size();
        row.accuracy = group_accuracy(groups);
        rep.files[prefix + "groups_g" + std::to_string(g) + ".csv"] =
            render([&](std::ostream& os) { write_group_attributions(os, groups); });

        CovDiagnostic& d = cov[g];
        d.group_size = g;
        const auto& classes = *r.classes;
        for (std::size_t i = 0; i < groups.size(); ++i) {
          if (!groups[i].correct()) continue;
          ++d.correct_groups;
          std::vector<PredictionDistribution> members;
          for (const std::string& id : formed[i].fragment_ids) members.push_back(prediction_for(r, id));
          const auto cv = coefficient_of_variation(members);
          const std::size_t truth =
              static_cast<std::size_t>(std::lower_bound(classes.begin(), classes.end(), groups[i].truth) - classes.begin());
          if (!cv[truth]) continue;
          bool minimal = true;
          for (std::size_t k = 0; k < cv.size(); ++k) {
            if (k != truth && cv[k] && *cv[k] < *cv[truth]) minimal = false;
          }
          d.truth_minimal += minimal ? 1 : 0;
        }
      }
      out.rows.push_back(row);
      rep.summary_rows.push_back({std::to_string(seed), std::to_string(g), std::to_string(row.groups),
                                  format_fixed(row.accuracy)});
    }
  }
  for (std::size_t g : group_sizes) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const AttributionSweepRow& row : out.rows) {
      if (row.group_size == g) {
        sum += row.accuracy;
        ++n;
      }
    }
    out.mean_accuracy[g] = sum / static_cast<double>(n);
    rep.summary_rows.push_back({"mean", std::to_string(g), "", format_fixed(out.mean_accuracy[g])});
  }
  std::string cov_csv = "group_size,correct_groups,truth_min_cov,fraction\n";
  for (const auto& [g, d] : cov) {
    out.cov.push_back(d);
    const double frac = d.correct_groups == 0 ? 0.0 : static_cast<double>(d.truth_minimal) / static_cast<double>(d.correct_groups);
    cov_csv += std::to_string(g) + "," + std::to_string(d.correct_groups) + "," + std::to_string(d.truth_minimal) + "," +
               format_fixed(frac) + "\n";
  }
  if (!cov.empty()) rep.files["cov.csv"] = cov_csv;
  return out;
}

OpenWorldResult run_open_world_rounds(const Corpus& c, std::size_t n_unknown, const ForestConfig& cfg,
                                      std::size_t folds, std::span<const std::size_t> group_sizes,
                                      std::uint64_t seed) {
  if (group_sizes.empty()) throw DataError("open-world run needs at least one group size");
  OpenWorldResult out;
  ExperimentReport& rep = out.report;
  rep.name = "openworld";
  echo_forest_config(rep, cfg);
  rep.config.emplace_back("seed", std::to_string(seed));
  rep.config.emplace_back("folds", std::to_string(folds));
  rep.config.emplace_back("unknown_authors", std::to_string(n_unknown));
  rep.config.emplace_back("group_sizes", join_sizes(group_sizes));
  rep.summary_header = {"round", "group_size", "records", "in_world", "out_of_world", "in_world_accuracy",
                        "best_t1", "f1_1", "best_t2", "f1_2", "best_t3", "f1_3"};

  auto t0 = Clock::now();
  const std::vector<FragmentCounts> counts = extract_all(c.fragments);
  rep.timings.emplace_back("extract", seconds_since(t0));

  if (n_unknown == 0 || n_unknown >= c.authors.size()) {
    throw DataError("open-world run needs between 1 and " + std::to_string(c.authors.size() - 1) + " unknown authors");
  }
  const std::size_t rounds = c.authors.size() / n_unknown;
  for (std::size_t round = 0; round < rounds; ++round) {
    const OpenWorldPartition part = partition_open_world(c, n_unknown, round, seed);
    const std::vector<FragmentCounts> pool = counts_of_authors(counts, part.suspects);
    std::vector<FragmentCounts> extra = counts_of_authors(counts, part.unknowns);
    std::sort(extra.begin(), extra.end(),
              [](const FragmentCounts& a, const FragmentCounts& b) { return a.fragment_id < b.fragment_id; });
    // Per unknown author: seeded shuffle, then round-robin over folds.
    std::vector<std::size_t> extra_folds(extra.size());
    std::map<std::string, std::vector<std::size_t>> by_author;
    for (std::size_t i = 0; i < extra.size(); ++i) by_author[extra[i].author_key].push_back(i);
    for (auto& [author, idx] : by_author) {
      Rng rng = make_rng(derive_seed(seed, "unknown-folds", round), hash_name(author));
      shuffle_in_place(idx, rng);
      for (std::size_t j = 0; j < idx.size(); ++j) extra_folds[idx[j]] = j % folds;
    }

    const Corpus suspects = restrict_to_authors(c, part.suspects);
    const std::uint64_t round_seed = derive_seed(seed, "round", round);
    const FoldPlan plan = stratified_folds(suspects, folds, round_seed);
    ForestConfig run_cfg = cfg;
    run_cfg.seed = round_seed;
    t0 = Clock::now();
    const ValidationResult r = cross_validate(pool, plan, run_cfg, extra, extra_folds);
    rep.timings.emplace_back("cv round " + std::to_string(round), seconds_since(t0));

    std::string unknown_list;
    for (const std::string& a : part.unknowns) unknown_list += (unknown_list.empty() ? "" : " ") + a;
    rep.config.emplace_back("round" + std::to_string(round) + "_unknowns", unknown_list);

    for (std::size_t g : group_sizes) {
      OpenWorldSetting s;
      s.round = round;
      s.group_size = g;
      if (g == 1) {
        s.records = records_of(r);
      } else {
        const std::vector<GroupAttribution> groups = aggregate_predictions(r, GroupingSpec{g, MergeOrder::Ordered, round_seed});
        s.records = records_of(groups, r.classes);
      }
      s.sweep = metrics_sweep(s.records);
      const std::string prefix = "round" + std::to_string(round) + "_g" + std::to_string(g) + "/";
      rep.files[prefix + "records.csv"] = render([&](std::ostream& os) { write_records_csv(os, s.records); });
      rep.files[prefix + "calibration.csv"] =
          render([&](std::ostream& os) { write_calibration_csv(os, build_calibration_curve(s.records)); });
      rep.files[prefix + "thresholds.csv"] = render([&](std::ostream& os) { write_thresholds_csv(os, s.sweep); });
      const std::vector<RocPoint> roc = roc_points(s.records);
      rep.files[prefix + "roc.csv"] = render([&](std::ostream& os) { write_roc_csv(os, roc); });

      std::size_t in_world = 0;
      std::size_t oow = 0;
      std::size_t hits = 0;
      for (const AttributionRecord& rec : s.records) {
        if (rec.outcome == Outcome::OutOfWorld) {
          ++oow;
        } else {
          ++in_world;
          hits += rec.outcome == Outcome::Correct ? 1 : 0;
        }
      }
      std::vector<std::string> row = {std::to_string(round), std::to_string(g), std::to_string(s.records.size()),
                                      std::to_string(in_world), std::to_string(oow),
                                      in_world ? format_fixed(static_cast<double>(hits) / static_cast<double>(in_world)) : ""};
      for (std::size_t k = 0; k < 3; ++k) {
        const auto& t = s.sweep.best_threshold[k];
        if (!t) {
          row.insert(row.end(), {"", ""});
          continue;
        }
        const auto idx = static_cast<std::size_t>(std::lround(*t * 10.0));
        row.push_back(format_fixed(*t, 1));
        row.push_back(format_fixed(*s.sweep.rows[idx].criteria[k].f1));
      }
      rep.summary_rows.push_back(std::move(row));
      out.settings.push_back(std::move(s));
    }
  }
  return out;
}

SizeSweepResult run_size_sweep(const Corpus& c, std::span<const SizeSetting> settings, const ForestConfig& cfg,
                               std::size_t folds, std::uint64_t seed) {
  SizeSweepResult out;
  ExperimentReport& rep = out.report;
  rep.name = "sizes";
  echo_forest_config(rep, cfg);
  rep.config.emplace_back("seed", std::to_string(seed));
  rep.config.emplace_back("folds", std::to_string(folds));
  rep.summary_header = {"min_loc", "max_loc", "samples_per_author", "authors", "fragments", "accuracy", "status"};

  for (const SizeSetting& s : settings) {
    SizeSweepRow row;
    row.setting = s;
    Corpus subset = filter_min_loc(c, s.min_loc);
    if (s.max_loc) subset = filter_max_loc(subset, *s.max_loc);
    std::size_t eligible = 0;
    for (const auto& [author, n] : subset.author_counts()) eligible += n >= s.samples_per_author ? 1 : 0;

    const std::string label = "loc" + std::to_string(s.min_loc) + (s.max_loc ? "-" + std::to_string(*s.max_loc) : "+") +
                              "_n" + std::to_string(s.samples_per_author);
    if (s.samples_per_author < folds) {
      row.status = "skipped: fewer samples per author than folds";
    } else if (eligible < 2) {
      row.status = "skipped: " + std::to_string(eligible) + " authors with enough samples";
      row.authors = eligible;
    } else {
      const Corpus balanced = balance_per_author(subset, s.samples_per_author, derive_seed(seed, "balance"));
      row.authors = balanced.authors.size();
      row.fragments = balanced.size();
      ForestConfig run_cfg = cfg;
      run_cfg.seed = seed;
      const auto t0 = Clock::now();
      const ValidationResult r = cross_validate(balanced, stratified_folds(balanced, folds, seed), run_cfg);
      rep.timings.emplace_back(label, seconds_since(t0));
      row.accuracy = r.accuracy();
      row.status = "ok";
      rep.files[label + "/predictions.csv"] = predictions_csv(r);
    }
    rep.summary_rows.push_back({std::to_string(s.min_loc), s.max_loc ? std::to_string(*s.max_loc) : "",
                                std::to_string(s.samples_per_author), std::to_string(row.authors),
                                std::to_string(row.fragments), row.accuracy ? format_fixed(*row.accuracy) : "",
                                row.status});
    out.rows.push_back(std::move(row));
  }
  return out;
}

CorruptionSweepResult run_corruption_sweep(const Corpus& c, std::span<const std::size_t> m_values,
                                           const ForestConfig& cfg, std::size_t folds, std::uint64_t seed) {
  CorruptionSweepResult out;
  ExperimentReport& rep = out.report;
  rep.name = "corruption";
  echo_forest_config(rep, cfg);
  rep.config.emplace_back("seed", std::to_string(seed));
  rep.config.emplace_back("folds", std::to_string(folds));
  rep.config.emplace_back("swaps", join_sizes(m_values));
  rep.summary_header = {"swaps", "corrupted_fraction", "accuracy", "decline"};

  const FoldPlan plan = stratified_folds(c, folds, seed);
  const std::vector<FragmentCounts> original = extract_all(c.fragments);
  std::map<std::string, std::string> truth;
  for (const Fragment& f : c.fragments) truth[f.fragment_id] = f.author_key;
  ForestConfig run_cfg = cfg;
  run_cfg.seed = seed;

  std::optional<double> baseline;
  for (std::size_t m : m_values) {
    const Corpus corrupted = corrupt_labels(c, m, derive_seed(seed, "corrupt", m));
    std::map<std::string, std::string> label;
    for (const Fragment& f : corrupted.fragments) label[f.fragment_id] = f.author_key;
    std::vector<FragmentCounts> counts = original;
    for (FragmentCounts& fc : counts) fc.author_key = label.at(fc.fragment_id);

    const auto t0 = Clock::now();
    ValidationResult r = cross_validate(counts, plan, run_cfg);
    rep.timings.emplace_back("m " + std::to_string(m), seconds_since(t0));
    for (std::size_t i = 0; i < r.size(); ++i) r.truth[i] = truth.at(r.predictions[i].fragment_ids.front());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < r.size(); ++i) hits += r.correct(i) ? 1 : 0;
    rep.files["m" + std::to_string(m) + "/predictions.csv"] = predictions_csv(r);
    CorruptionRow row;
    row.swaps = m;
    row.corrupted_fraction = c.empty() ? 0.0 : 2.0 * static_cast<double>(m) / static_cast<double>(c.size());
    row.accuracy = r.size() == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(r.size());
    if (!baseline) baseline = row.accuracy;
    rep.summary_rows.push_back({std::to_string(m), format_fixed(row.corrupted_fraction), format_fixed(row.accuracy),
                                format_fixed(*baseline - row.accuracy)});
    out.rows.push_back(row);
  }
  return out;
}

PseudoFComponents pseudo_f_components(std::span<const std::vector<double>> values_per_class) {
  if (values_per_class.size() < 2) throw DataError("pseudo-F needs at least two classes");
  PseudoFComponents out;
  double sum_total = 0.0;
  for (const auto& v : values_per_class) {
    if (v.empty()) throw DataError("pseudo-F: empty class");
    out.n += v.size();
    sum_total += std::accumulate(v.begin(), v.end(), 0.0);
  }
  const double n_total = static_cast<double>(out.n);
  const double grand = sum_total / n_total;
  for (const auto& v : values_per_class) {
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    out.between += n * (mean - grand) * (mean - grand);
    out.residual += ss;  // n * population variance
  }
  out.between /= n_total;
  out.residual /= n_total;
  return out;
}

std::optional<double> pseudo_f_statistic(std::span<const std::vector<double>> values_per_class) {
  const PseudoFComponents c = pseudo_f_components(values_per_class);
  if (c.residual <= 0.0) return std::nullopt;
  return c.between / c.residual;
}

double quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw DataError("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw DataError("quantile level outside [0, 1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

PseudoFTable pseudo_f_table(const std::map<std::string, std::vector<SparseFeatureVector>>& vectors_by_class,
                            std::span<const std::size_t> merge_sizes) {
  if (vectors_by_class.size() < 2) throw DataError("pseudo-F table needs at least two classes");
  std::size_t dim = 0;
  for (const auto& [cls, vs] : vectors_by_class) {
    for (const SparseFeatureVector& v : vs) dim = std::max(dim, v.dimension);
  }
  PseudoFTable table;
  std::vector<std::set<std::size_t>> tops;
  for (std::size_t m : merge_sizes) {
    if (m == 0) throw DataError("merge size must be positive");
    // Sparse transpose: column -> (class, group, value).
    struct Cell {
      std::size_t cls;
      std::size_t group;
      double value;
    };
    std::vector<std::vector<Cell>> by_col(dim);
    std::vector<std::size_t> groups_per_class;
    std::size_t merged_count = 0;
    double nonzero = 0.0;
    for (const auto& [cls, vs] : vectors_by_class) {
      const std::size_t groups = vs.size() / m;
      if (groups == 0) throw DataError("class " + cls + " has fewer vectors than merge size " + std::to_string(m));
      for (std::size_t g = 0; g < groups; ++g) {
        const SparseFeatureVector merged =
            m == 1 ? vs[g] : merge_vectors(std::span(vs).subspan(g * m, m), MergeNormalization::Average);
        for (const auto& [col, val] : merged.entries) by_col[col].push_back({groups_per_class.size(), g, val});
        nonzero += static_cast<double>(merged.nonzero());
        ++merged_count;
      }
      groups_per_class.push_back(groups);
    }
    std::vector<std::vector<double>> values(groups_per_class.size());
    std::vector<std::pair<double, std::size_t>> stats;
    for (std::size_t d = 0; d < dim; ++d) {
      if (by_col[d].empty()) continue;  // all zero: no residual
      for (std::size_t k = 0; k < values.size(); ++k) values[k].assign(groups_per_class[k], 0.0);
      for (const Cell& cell : by_col[d]) values[cell.cls][cell.group] = cell.value;
      if (const auto f = pseudo_f_statistic(values)) stats.emplace_back(*f, d);
    }
    PseudoFRow row;
    row.merge_size = m;
    row.features = stats.size();
    row.mean_nonzero = nonzero / static_cast<double>(merged_count);
    std::set<std::size_t> top;
    if (!stats.empty()) {
      std::vector<double> sorted;
      for (const auto& [f, d] : stats) sorted.push_back(f);
      std::sort(sorted.begin(), sorted.end());
      const double qs[5] = {0.0, 0.25, 0.5, 0.75, 1.0};
      for (std::size_t i = 0; i < 5; ++i) row.quantiles[i] = quantile(sorted, qs[i]);
      for (const auto& [f, d] : stats) {
        if (f >= row.quantiles[3]) top.insert(d);
      }
    }
    tops.push_back(std::move(top));
    table.rows.push_back(row);
  }
  if (!tops.empty()) {
    std::set<std::size_t> common = tops.front();
    for (std::size_t i = 1; i < tops.size(); ++i) {
      std::set<std::size_t> next;
      std::set_intersection(common.begin(), common.end(), tops[i].begin(), tops[i].end(),
                            std::inserter(next, next.begin()));
      common = std::move(next);
    }
    table.top_quartile_overlap = common.size();
  }
  return table;
}

AnalysisResult run_analysis(const Corpus& c, std::span<const std::size_t> merge_sizes) {
  AnalysisResult out;
  ExperimentReport& rep = out.report;
  rep.name = "analysis";
  rep.config.emplace_back("merge_sizes", join_sizes(merge_sizes));
  rep.config.emplace_back("fragments", std::to_string(c.size()));

  auto t0 = Clock::now();
  std::vector<FragmentCounts> counts = extract_all(c.fragments);
  std::sort(counts.begin(), counts.end(),
            [](const FragmentCounts& a, const FragmentCounts& b) { return a.fragment_id < b.fragment_id; });
  const FeatureDictionary dict = build_dictionary(counts);
  const std::vector<SparseFeatureVector> vectors = vectorize_all(counts, dict);
  rep.timings.emplace_back("features", seconds_since(t0));
  out.unmerged = sparsity_report(vectors);

  std::map<std::string, std::vector<SparseFeatureVector>> by_class;
  for (std::size_t i = 0; i < counts.size(); ++i) by_class[counts[i].author_key].push_back(vectors[i]);
  t0 = Clock::now();
  out.table = pseudo_f_table(by_class, merge_sizes);
  rep.timings.emplace_back("pseudo-f", seconds_since(t0));

  rep.summary_header = {"merge_size", "dimension", "mean_nonzero", "features", "q0", "q25", "q50", "q75", "q100"};
  for (const PseudoFRow& row : out.table.rows) {
    std::vector<std::string> cells = {std::to_string(row.merge_size), std::to_string(dict.dimension()),
                                      format_fixed(row.mean_nonzero, 3), std::to_string(row.features)};
    for (double q : row.quantiles) cells.push_back(format_fixed(q));
    rep.summary_rows.push_back(std::move(cells));
  }
  rep.files["overlap.csv"] = "top_quartile_overlap\n" + std::to_string(out.table.top_quartile_overlap) + "\n";
  rep.files["loc_histogram.csv"] = render([&](std::ostream& os) { write_loc_histogram_csv(os, loc_histogram(c)); });
  return out;
}

SpecialCaseResult run_special_cases(const Corpus& c, const ForestConfig& cfg, std::size_t folds, std::uint64_t seed) {
  SpecialCaseResult out;
  ExperimentReport& rep = out.report;
  rep.name = "special";
  echo_forest_config(rep, cfg);
  rep.config.emplace_back("seed", std::to_string(seed));
  rep.config.emplace_back("folds", std::to_string(folds));
  rep.summary_header = {"task", "runs", "average", "min", "max"};

  const std::vector<FragmentCounts> counts = extract_all(c.fragments);
  const FoldPlan plan = stratified_folds(c, folds, seed);
  ForestConfig run_cfg = cfg;
  run_cfg.seed = seed;
  const std::vector<std::string> authors(c.authors.begin(), c.authors.end());

  std::string detail = "task,a,b,accuracy\n";
  const auto summarize = [&](const std::string& task, const std::vector<double>& accs) {
    SpecialCaseSummary s;
    s.task = task;
    s.runs = accs.size();
    if (!accs.empty()) {
      s.average = std::accumulate(accs.begin(), accs.end(), 0.0) / static_cast<double>(accs.size());
      s.minimum = *std::min_element(accs.begin(), accs.end());
      s.maximum = *std::max_element(accs.begin(), accs.end());
    }
    rep.summary_rows.push_back({task, std::to_string(s.runs), format_fixed(s.average), format_fixed(s.minimum),
                                format_fixed(s.maximum)});
    out.tasks.push_back(s);
  };

  auto t0 = Clock::now();
  std::vector<double> pair_accs;
  for (std::size_t i = 0; i < authors.size(); ++i) {
    for (std::size_t j = i + 1; j < authors.size(); ++j) {
      const double acc = two_class_task(counts, authors[i], authors[j], run_cfg, plan);
      pair_accs.push_back(acc);
      detail += "two_class," + csv_field(authors[i]) + "," + csv_field(authors[j]) + "," + format_fixed(acc) + "\n";
    }
  }
  rep.timings.emplace_back("two_class", seconds_since(t0));
  summarize("two_class", pair_accs);

  t0 = Clock::now();
  std::vector<double> ver_accs;
  for (const std::string& a : authors) {
    const double acc = verification_task(counts, a, run_cfg, plan);
    ver_accs.push_back(acc);
    detail += "verification," + csv_field(a) + ",," + format_fixed(acc) + "\n";
  }
  rep.timings.emplace_back("verification", seconds_since(t0));
  summarize("verification", ver_accs);
  rep.files["tasks.csv"] = detail;
  return out;
}

ExperimentReport run_merge_experiment(const Corpus& c, const ForestConfig& cfg, std::size_t group_size,
                                      std::size_t folds, MergeOrder mode, std::uint64_t seed) {
  ExperimentReport rep;
  rep.name = "merge";
  echo_forest_config(rep, cfg);
  rep.config.emplace_back("seed", std::to_string(seed));
  rep.config.emplace_back("folds", std::to_string(folds));
  rep.config.emplace_back("group_size", std::to_string(group_size));
  rep.config.emplace_back("merge_order", mode == MergeOrder::Ordered ? "ordered" : "random");
  rep.summary_header = {"train", "test", "accuracy"};

  const std::vector<FragmentCounts> counts = extract_all(c.fragments);
  ForestConfig run_cfg = cfg;
  run_cfg.seed = seed;
  const GroupingSpec spec{group_size, mode, seed};
  for (const bool train_merged : {false, true}) {
    for (const bool test_merged : {false, true}) {
      const auto t0 = Clock::now();
      const double acc = merged_experiment(counts, spec, run_cfg, folds, {train_merged, test_merged}, seed);
      const std::string tr = train_merged ? "merged" : "unmerged";
      const std::string te = test_merged ? "merged" : "unmerged";
      rep.timings.emplace_back(tr + "/" + te, seconds_since(t0));
      rep.summary_rows.push_back({tr, te, format_fixed(acc)});
    }
  }
  return rep;
}

}  // namespace blamestyle
