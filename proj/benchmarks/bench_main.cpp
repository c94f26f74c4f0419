#include <benchmark/benchmark.h>

#include <random>

#include "dstgat/data/synth.hpp"
#include "dstgat/graph/gat.hpp"
#include "dstgat/model/tracker.hpp"

using namespace dstgat;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  Matrix m(r, c);
  for (double& v : m.values()) v = d(rng);
  return m;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, n, 1), b = random_matrix(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(64)->Arg(128);

data::SynthCorpus corpus() {
  data::SynthConfig sc;
  sc.dialogue_count = 8;
  return data::generate_synthetic_corpus(sc);
}

void BM_GatStackForward(benchmark::State& state) {
  const auto syn = corpus();
  const auto type = state.range(0) ? graph::GraphType::kDSVGraph : graph::GraphType::kDSGraph;
  const auto topo = type == graph::GraphType::kDSVGraph ? graph::build_dsv_graph(syn.ontology)
                                                        : graph::build_ds_graph(syn.ontology);
  graph::GatStack stack({type, 1, 1, static_cast<std::size_t>(state.range(1))}, 32, 0);
  const Matrix x = random_matrix(topo.node_count(), 32, 3);
  for (auto _ : state) {
    Tape t(false);
    benchmark::DoNotOptimize(graph::gat_stack_forward(t.constant(x), topo, stack).value());
  }
}
BENCHMARK(BM_GatStackForward)->Args({0, 2})->Args({1, 2})->Args({1, 3});

void BM_CausalForward(benchmark::State& state) {
  model::LmConfig c;
  c.hidden = 32;
  model::TrackerModel lm(c, 200);
  std::vector<data::TokenId> tokens(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < tokens.size(); ++i) tokens[i] = 8 + i % 190;
  for (auto _ : state) {
    Tape t(false);
    benchmark::DoNotOptimize(model::causal_forward(t, lm, tokens).value());
  }
}
BENCHMARK(BM_CausalForward)->Arg(64)->Arg(128)->Arg(256);

void BM_TrainStep(benchmark::State& state) {
  const auto syn = corpus();
  const auto tok = data::build_vocab(syn.corpus, syn.ontology);
  model::LmConfig c;
  c.hidden = 32;
  const graph::GatConfig g = state.range(0) ? graph::GatConfig{graph::GraphType::kDSVGraph, 1, 1, 2}
                                            : graph::GatConfig{};
  model::Tracker tracker(c, g, syn.ontology, tok);
  AdamW opt(tracker.parameter_groups(1e-3, 1e-3), std::size_t{1} << 40);
  const auto samples = data::last_turn_filter(syn.corpus);
  std::size_t i = 0;
  for (auto _ : state) {
    const data::TurnSample s = samples[i++ % samples.size()];
    benchmark::DoNotOptimize(model::train_step(tracker, opt, syn.corpus, std::span(&s, 1)).loss);
  }
}
BENCHMARK(BM_TrainStep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
