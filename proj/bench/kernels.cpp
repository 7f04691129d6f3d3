// Serial reference vs OpenMP path for each parallel kernel. Arg 0 = serial,
// 1 = parallel.

#include <benchmark/benchmark.h>

#include "rhyme/regression.hpp"
#include "rhyme/sweep.hpp"
#include "rhyme/tagger.hpp"
#include "synthetic.hpp"

using namespace rhyme;

namespace {

Execution mode(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::serial : Execution::parallel;
}

struct Planted {
  synth::PlantedCorpus data;
  std::shared_ptr<Transcriber> tr;
  std::unique_ptr<RhymeModel> model;
};

Planted& planted() {
  static Planted p = [] {
    synth::PlantedConfig pc;
    auto data = synth::generate_planted(pc, 20000, 1);
    auto tr = std::make_shared<Transcriber>(synth::lexicon_backend(data.lexicon),
                                            FeatureTable::shipped());
    auto model = std::make_unique<RhymeModel>(train_model(whole_corpus(data.corpus), *tr, {}));
    return Planted{std::move(data), tr, std::move(model)};
  }();
  return p;
}

void BM_ScoreCandidates(benchmark::State& state) {
  auto& p = planted();
  std::vector<std::vector<std::uint32_t>> comps;
  for (const auto& [w, ipa] : p.data.lexicon) {
    comps.push_back(p.model->lookup(
        decompose_components(extract_rhyme_segment(parse_ipa(ipa, FeatureTable::shipped())))));
  }
  std::vector<CandidatePair> cands;
  for (std::uint32_t i = 0; i < comps.size(); ++i) {
    for (std::uint32_t j = i + 1; j < comps.size(); ++j) cands.push_back({i, j});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(score_candidates(*p.model, comps, cands, mode(state)));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * cands.size()));
}
BENCHMARK(BM_ScoreCandidates)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_TagPoems(benchmark::State& state) {
  auto& p = planted();
  std::vector<const Poem*> poems;
  for (const auto& poem : p.data.corpus.poems()) poems.push_back(&poem);
  for (auto _ : state) {
    benchmark::DoNotOptimize(tag_poems(*p.model, poems, *p.tr, mode(state)));
  }
}
BENCHMARK(BM_TagPoems)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Sweep(benchmark::State& state) {
  auto& p = planted();
  SweepConfig cfg;
  cfg.sizes = {2000, 4000};
  cfg.samples = 4;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_sweep(p.data.corpus, {p.data.truth}, *p.tr, cfg, mode(state)));
  }
}
BENCHMARK(BM_Sweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_RegressionChains(benchmark::State& state) {
  const auto rows = synth::generate_agreement_rows(synth::default_regression_truth(1), 2000, 2);
  LogitModelConfig cfg;
  cfg.draws = 800;
  cfg.warmup = 200;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_hierarchical_logit(rows, cfg, mode(state)));
  }
}
BENCHMARK(BM_RegressionChains)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
