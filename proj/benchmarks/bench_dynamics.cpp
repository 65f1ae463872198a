#include "sensegraph/dynamics.hpp"
#include "sensegraph/eval.hpp"
#include "sensegraph/graph.hpp"
#include "sensegraph/rng.hpp"
#include "sensegraph/synth.hpp"

#include <benchmark/benchmark.h>

#include <string>

using namespace sensegraph;

namespace {

EmbeddingSet random_embeddings(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(n, d);
  std::vector<NodeId> ids;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) m(i, k) = rng.normal();
    m.row(i).normalize();
    ids.push_back("n" + std::to_string(i));
  }
  return EmbeddingSet(ids, m, ModalityTag::parse("CNN"));
}

AssignmentMatrix random_assignment(std::size_t n, std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  Matrix x(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t h = 0; h < m; ++h) x(i, h) = rng.uniform01() + 1e-3;
    x.row(i) /= x.row(i).sum();
  }
  std::vector<NodeId> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("n" + std::to_string(i));
  return AssignmentMatrix(ids, x);
}

void BM_SupportPayoff(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto m = static_cast<std::size_t>(state.range(1));
  const auto graph = build_similarity(random_embeddings(n, 64, 1));
  const auto x = random_assignment(n, m, 2);
  for (auto _ : state) benchmark::DoNotOptimize(support_payoff(graph, x));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * m));
}
BENCHMARK(BM_SupportPayoff)->Args({300, 3})->Args({1000, 163})->Args({3510, 163})->Unit(benchmark::kMillisecond);

void BM_RdStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto m = static_cast<std::size_t>(state.range(1));
  const auto graph = build_similarity(random_embeddings(n, 64, 3));
  const auto x = random_assignment(n, m, 4);
  for (auto _ : state) benchmark::DoNotOptimize(rd_step(graph, x, true));
}
BENCHMARK(BM_RdStep)->Args({300, 3})->Args({1000, 163})->Args({3510, 163})->Unit(benchmark::kMillisecond);

void BM_BuildSimilarity(benchmark::State& state) {
  const auto emb = random_embeddings(static_cast<std::size_t>(state.range(0)),
                                     static_cast<std::size_t>(state.range(1)), 5);
  for (auto _ : state) benchmark::DoNotOptimize(build_similarity(emb));
}
BENCHMARK(BM_BuildSimilarity)->Args({300, 16})->Args({3510, 300})->Args({3510, 4096})->Unit(benchmark::kMillisecond);

void BM_SyntheticGrid(benchmark::State& state) {
  const auto data = make_synthetic({});
  ExperimentGrid grid;
  grid.labels_per_class = {1, 2, 8};
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_experiment(data.embeddings[0], data.inventory, data.truth, grid));
  }
}
BENCHMARK(BM_SyntheticGrid)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
