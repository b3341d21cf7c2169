// Parallel kernels against their serial references on a small synthetic corpus.

#include <benchmark/benchmark.h>

#include "blamestyle/features.hpp"
#include "blamestyle/forest.hpp"
#include "blamestyle/synthetic.hpp"

using namespace blamestyle;

namespace {

struct Fixture {
  Corpus corpus;
  std::vector<FragmentCounts> counts;
  TrainingSet data;
  RandomForestModel model;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture x;
    SyntheticOptions opt;
    opt.authors = 8;
    opt.fragments_per_author = 60;
    x.corpus = generate_synthetic_corpus(opt);
    x.counts = extract_all(x.corpus.fragments);
    const FeatureDictionary dict = build_dictionary(x.counts);
    std::vector<std::string> labels;
    for (const Fragment& fr : x.corpus.fragments) labels.push_back(fr.author_key);
    x.data = TrainingSet::from_labels(vectorize_all(x.counts, dict), labels);
    ForestConfig cfg;
    cfg.n_trees = 50;
    x.model = train_forest(x.data, cfg);
    return x;
  }();
  return f;
}

ForestConfig bench_config(const benchmark::State& s) {
  ForestConfig cfg;
  cfg.n_trees = static_cast<std::size_t>(s.range(0));
  return cfg;
}

void BM_ExtractAll(benchmark::State& s) {
  const Fixture& f = fixture();
  for (auto _ : s) benchmark::DoNotOptimize(extract_all(f.corpus.fragments));
  s.SetItemsProcessed(s.iterations() * static_cast<std::int64_t>(f.corpus.size()));
}

void BM_TrainForest(benchmark::State& s) {
  const Fixture& f = fixture();
  const ForestConfig cfg = bench_config(s);
  for (auto _ : s) benchmark::DoNotOptimize(train_forest(f.data, cfg));
}

void BM_TrainForestSerial(benchmark::State& s) {
  const Fixture& f = fixture();
  const ForestConfig cfg = bench_config(s);
  for (auto _ : s) benchmark::DoNotOptimize(reference::train_forest_serial(f.data, cfg));
}

void BM_PredictAll(benchmark::State& s) {
  const Fixture& f = fixture();
  for (auto _ : s) benchmark::DoNotOptimize(f.model.predict_all(f.data.rows));
  s.SetItemsProcessed(s.iterations() * static_cast<std::int64_t>(f.data.rows.size()));
}

void BM_PredictAllSerial(benchmark::State& s) {
  const Fixture& f = fixture();
  for (auto _ : s) benchmark::DoNotOptimize(reference::predict_all_serial(f.model, f.data.rows));
  s.SetItemsProcessed(s.iterations() * static_cast<std::int64_t>(f.data.rows.size()));
}

}  // namespace

BENCHMARK(BM_ExtractAll)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrainForest)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrainForestSerial)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictAll)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictAllSerial)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
