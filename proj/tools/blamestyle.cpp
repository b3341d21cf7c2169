// Command-line front end. Results go to stdout or files, diagnostics to stderr.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "blamestyle/blame.hpp"
#include "blamestyle/calibration.hpp"
#include "blamestyle/corpus.hpp"
#include "blamestyle/ensemble.hpp"
#include "blamestyle/error.hpp"
#include "blamestyle/experiments.hpp"
#include "blamestyle/features.hpp"
#include "blamestyle/forest.hpp"
#include "blamestyle/synthetic.hpp"

namespace fs = std::filesystem;
using namespace blamestyle;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

struct UsageError : Error {
  using Error::Error;
};

struct Globals {
  std::uint64_t seed = 1;
  std::string out;
  std::string corpus;
  ForestConfig forest;
};

Corpus load_corpus(const Globals& g) {
  if (g.corpus.empty()) throw UsageError("--corpus is required");
  return read_corpus(fs::path(g.corpus));
}

fs::path require_out(const Globals& g) {
  if (g.out.empty()) throw UsageError("--out is required");
  return fs::path(g.out);
}

ForestConfig forest_config(const Globals& g) {
  ForestConfig cfg = g.forest;
  cfg.seed = g.seed;
  cfg.validate();
  return cfg;
}

void report_written(const fs::path& dir, const ExperimentReport& r) {
  std::cerr << "wrote " << dir.string() << '\n';
  std::cout << r.summary_csv();
}

int cmd_synth(const Globals& g, const SyntheticOptions& base) {
  SyntheticOptions opt = base;
  opt.seed = g.seed;
  const Corpus c = generate_synthetic_corpus(opt);
  write_corpus(require_out(g), c);
  std::cerr << c.authors.size() << " authors, " << c.size() << " fragments\n";
  return 0;
}

int cmd_ingest(const Globals& g, const std::vector<std::string>& repos, const std::vector<std::string>& extensions,
               const std::vector<std::string>& excluded, bool dedupe_content) {
  if (repos.empty()) throw UsageError("ingest needs at least one repository path");
  const fs::path out = require_out(g);
  ScanOptions opt;
  if (!extensions.empty()) opt.extensions = std::set<std::string>(extensions.begin(), extensions.end());
  opt.exclude_authors = std::set<std::string>(excluded.begin(), excluded.end());

  std::set<fs::path> seen;
  std::vector<Fragment> all;
  for (const std::string& r : repos) {
    const fs::path canon = fs::weakly_canonical(fs::path(r));
    if (!seen.insert(canon).second) {
      std::cerr << "skipping duplicate repository " << r << '\n';
      continue;
    }
    std::vector<Fragment> fs_ = scan_repository(canon, opt);
    std::cerr << canon.string() << ": " << fs_.size() << " fragments\n";
    all.insert(all.end(), std::make_move_iterator(fs_.begin()), std::make_move_iterator(fs_.end()));
  }
  Corpus c = Corpus::from_fragments(std::move(all));
  if (dedupe_content) c = dedupe(c);
  write_corpus(out, c);
  std::cout << "authors," << c.authors.size() << "\nfragments," << c.size() << '\n';
  return 0;
}

int cmd_stats(const Globals& g) {
  const Corpus c = load_corpus(g);
  if (c.empty()) {
    std::cout << "empty corpus: no fragments in " << g.corpus << '\n';
    return 0;
  }
  const std::vector<LocBucket> buckets = loc_histogram(c);
  std::printf("authors    %zu\nfragments  %zu\n\n%-8s %10s %9s\n", c.authors.size(), c.size(), "loc", "fragments",
              "percent");
  for (const LocBucket& b : buckets) std::printf("%-8s %10zu %8.2f%%\n", b.label.c_str(), b.count, b.percent);
  if (!g.out.empty()) {
    std::ofstream os(g.out);
    if (!os) throw Error("cannot write " + g.out);
    write_loc_histogram_csv(os, buckets);
  }
  return 0;
}

int cmd_extract(const Globals& g) {
  const Corpus c = load_corpus(g);
  const fs::path out = require_out(g);
  fs::create_directories(out);
  const std::vector<FragmentCounts> counts = extract_all(c.fragments);
  const FeatureDictionary dict = build_dictionary(counts);
  const std::vector<SparseFeatureVector> vectors = vectorize_all(counts, dict);
  write_dictionary(out / "dictionary.txt", dict);
  std::ofstream os(out / "vectors.tsv");
  write_vectors(os, counts, vectors);
  const SparsityReport s = sparsity_report(vectors);
  std::cout << "dimension," << s.dimension << "\nvectors," << s.vectors << "\nmean_nonzero," << format_fixed(s.mean_nonzero, 3)
            << '\n';
  return 0;
}

int cmd_train(const Globals& g) {
  const Corpus c = load_corpus(g);
  const fs::path out = require_out(g);
  fs::create_directories(out);
  std::vector<const FragmentCounts*> train;
  const std::vector<FragmentCounts> counts = extract_all(c.fragments);
  for (const FragmentCounts& fc : counts) train.push_back(&fc);
  std::vector<std::string> classes(c.authors.begin(), c.authors.end());
  const FoldModel fm =
      fit_fold(train, forest_config(g), std::make_shared<const std::vector<std::string>>(std::move(classes)));
  write_dictionary(out / "dictionary.txt", fm.dictionary);
  write_model(out / "model.txt", fm.model);
  std::cerr << "trained " << fm.model.trees.size() << " trees on " << counts.size() << " fragments, "
            << fm.dictionary.dimension() << " features\n";
  return 0;
}

int cmd_attribute(const Globals& g, const std::string& model_dir, bool as_group) {
  if (model_dir.empty()) throw UsageError("--model is required");
  const Corpus c = load_corpus(g);
  const fs::path dir(model_dir);
  const FeatureDictionary dict = read_dictionary(dir / "dictionary.txt");
  const RandomForestModel model = read_model(dir / "model.txt");
  const std::vector<FragmentCounts> counts = extract_all(c.fragments);
  const std::vector<SparseFeatureVector> xs = vectorize_all(counts, dict);
  std::vector<PredictionDistribution> preds = model.predict_all(xs);
  std::cout << "fragment_id,predicted,confidence\n";
  for (std::size_t i = 0; i < preds.size(); ++i) {
    std::cout << counts[i].fragment_id << ',' << preds[i].predicted() << ',' << format_fixed(preds[i].confidence())
              << '\n';
  }
  if (as_group && !preds.empty()) {
    const PredictionDistribution avg = average_distributions(preds);
    std::cout << "group," << avg.predicted() << ',' << format_fixed(avg.confidence()) << '\n';
  }
  return 0;
}

std::vector<std::uint64_t> seed_list(const Globals& g, std::size_t n_seeds) {
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < n_seeds; ++i) seeds.push_back(g.seed + i);
  return seeds;
}

int cmd_sweep(const Globals& g, const std::string& experiment, const std::vector<std::size_t>& group_sizes,
              std::size_t folds, std::size_t n_seeds, const std::string& order,
              const std::vector<std::size_t>& min_locs, const std::vector<std::size_t>& samples) {
  const Corpus c = load_corpus(g);
  const fs::path out = require_out(g);
  const ForestConfig cfg = forest_config(g);
  const MergeOrder mode = order == "random" ? MergeOrder::Random : MergeOrder::Ordered;
  ExperimentReport rep;
  if (experiment == "attribution") {
    const std::vector<std::uint64_t> seeds = seed_list(g, n_seeds);
    rep = run_attribution_sweep(c, cfg, group_sizes, folds, seeds, mode).report;
  } else if (experiment == "sizes") {
    std::vector<SizeSetting> settings;
    for (std::size_t loc : min_locs) {
      for (std::size_t n : samples) settings.push_back({loc, n, std::nullopt});
    }
    rep = run_size_sweep(c, settings, cfg, folds, g.seed).report;
  } else if (experiment == "merge") {
    if (group_sizes.size() != 1) throw UsageError("merge experiment takes exactly one --group-sizes value");
    rep = run_merge_experiment(c, cfg, group_sizes.front(), folds, mode, g.seed);
  } else if (experiment == "special") {
    rep = run_special_cases(c, cfg, folds, g.seed).report;
  } else {
    throw UsageError("unknown experiment " + experiment);
  }
  report_written(write_report(out, rep), rep);
  return 0;
}

int cmd_openworld(const Globals& g, std::size_t unknown, std::size_t folds, const std::vector<std::size_t>& group_sizes) {
  const Corpus c = load_corpus(g);
  const fs::path out = require_out(g);
  const OpenWorldResult r = run_open_world_rounds(c, unknown, forest_config(g), folds, group_sizes, g.seed);
  report_written(write_report(out, r.report), r.report);
  return 0;
}

int cmd_corrupt(const Globals& g, const std::vector<std::size_t>& swaps, std::size_t folds) {
  const Corpus c = load_corpus(g);
  const fs::path out = require_out(g);
  const CorruptionSweepResult r = run_corruption_sweep(c, swaps, forest_config(g), folds, g.seed);
  report_written(write_report(out, r.report), r.report);
  return 0;
}

int cmd_analyze(const Globals& g, const std::vector<std::size_t>& merge_sizes) {
  const Corpus c = load_corpus(g);
  const fs::path out = require_out(g);
  const AnalysisResult r = run_analysis(c, merge_sizes);
  report_written(write_report(out, r.report), r.report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Authorship attribution of small source-code fragments"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Base seed")->capture_default_str();
  app.add_option("--out", g.out, "Output path");
  app.add_option("--corpus", g.corpus, "Corpus JSONL file");
  app.add_option("--trees", g.forest.n_trees, "Trees per forest")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--max-depth", g.forest.max_depth, "Maximum tree depth, 0 for unlimited")->capture_default_str();
  app.add_option("--features-per-split", g.forest.features_per_split, "Candidate features per split")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  SyntheticOptions synth_opt;
  auto* synth = app.add_subcommand("synth", "Generate the synthetic corpus");
  synth->add_option("--authors", synth_opt.authors)->capture_default_str();
  synth->add_option("--per-author", synth_opt.fragments_per_author)->capture_default_str();

  std::vector<std::string> repos;
  std::vector<std::string> extensions;
  std::vector<std::string> excluded;
  bool dedupe_content = false;
  auto* ingest = app.add_subcommand("ingest", "Blame repositories into a corpus");
  ingest->add_option("repos", repos, "Repository paths");
  ingest->add_option("--ext", extensions, "File extensions (with dot)");
  ingest->add_option("--exclude-author", excluded, "Author keys to drop");
  ingest->add_flag("--dedupe", dedupe_content, "Drop fragments whose content occurs more than once");

  auto* stats = app.add_subcommand("stats", "Corpus statistics");
  auto* extract = app.add_subcommand("extract", "Write the feature dictionary and vectors");
  auto* train = app.add_subcommand("train", "Train a forest on the whole corpus");

  std::string model_dir;
  bool as_group = false;
  auto* attribute = app.add_subcommand("attribute", "Attribute fragments with a trained model");
  attribute->add_option("--model", model_dir, "Directory written by train");
  attribute->add_flag("--group", as_group, "Also attribute all fragments together as one account");

  std::string experiment = "attribution";
  std::vector<std::size_t> group_sizes = {1, 5, 15};
  std::size_t folds = 10;
  std::size_t n_seeds = 1;
  std::string order = "ordered";
  std::vector<std::size_t> min_locs = {1, 5, 10};
  std::vector<std::size_t> samples = {10, 20, 50};
  auto* sweep = app.add_subcommand("sweep", "Attribution, dataset-size, merge or special-case experiments");
  sweep->add_option("--experiment", experiment)
      ->check(CLI::IsMember({"attribution", "sizes", "merge", "special"}))
      ->capture_default_str();
  sweep->add_option("--group-sizes", group_sizes)->delimiter(',')->capture_default_str();
  sweep->add_option("--folds", folds)->capture_default_str();
  sweep->add_option("--seeds", n_seeds, "Number of consecutive seeds from --seed")->capture_default_str();
  sweep->add_option("--order", order)->check(CLI::IsMember({"ordered", "random"}))->capture_default_str();
  sweep->add_option("--min-loc", min_locs)->delimiter(',')->capture_default_str();
  sweep->add_option("--samples", samples, "Samples per author")->delimiter(',')->capture_default_str();

  std::size_t unknown = 4;
  std::vector<std::size_t> ow_groups = {1, 5};
  auto* openworld = app.add_subcommand("openworld", "Open-world rounds with threshold metrics");
  openworld->add_option("--unknown", unknown, "Unknown authors per round")->capture_default_str();
  openworld->add_option("--folds", folds)->capture_default_str();
  openworld->add_option("--group-sizes", ow_groups)->delimiter(',')->capture_default_str();

  std::vector<std::size_t> swaps = {0, 18, 45, 90};
  auto* corrupt = app.add_subcommand("corrupt", "Ground-truth corruption sweep");
  corrupt->add_option("--swaps", swaps, "Label swaps m (2m labels wrong)")->delimiter(',')->capture_default_str();
  corrupt->add_option("--folds", folds)->capture_default_str();

  std::vector<std::size_t> merge_sizes = {1, 5, 15};
  auto* analyze = app.add_subcommand("analyze", "Sparsity and pseudo-F analysis");
  analyze->add_option("--merge-sizes", merge_sizes)->delimiter(',')->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*synth) return cmd_synth(g, synth_opt);
    if (*ingest) return cmd_ingest(g, repos, extensions, excluded, dedupe_content);
    if (*stats) return cmd_stats(g);
    if (*extract) return cmd_extract(g);
    if (*train) return cmd_train(g);
    if (*attribute) return cmd_attribute(g, model_dir, as_group);
    if (*sweep) return cmd_sweep(g, experiment, group_sizes, folds, n_seeds, order, min_locs, samples);
    if (*openworld) return cmd_openworld(g, unknown, folds, ow_groups);
    if (*corrupt) return cmd_corrupt(g, swaps, folds);
    if (*analyze) return cmd_analyze(g, merge_sizes);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const GitError& e) {
    std::cerr << "git error: " << e.what() << '\n' << e.diagnostics();
    return kExitData;
  } catch (const NotARepositoryError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitData;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}
