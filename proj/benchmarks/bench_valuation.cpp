// Scaling of the closed-form KNN Shapley: dominated by the per-test-point
// sort, so total cost is O(M * N log N).

#include <benchmark/benchmark.h>

#include "synrl/rng.hpp"
#include "synrl/valuation.hpp"

using namespace synrl;

namespace {

LabeledView random_view(std::size_t n, std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  LabeledView v;
  v.n = n;
  v.width = dim;
  v.features.resize(n * dim);
  v.labels.resize(n);
  for (double& f : v.features) f = rng.uniform(-1.0, 1.0);
  for (int& l : v.labels) l = int(rng.below(2));
  return v;
}

void BM_knn_shapley(benchmark::State& state) {
  const std::size_t n = std::size_t(state.range(0));
  const LabeledView train = random_view(n, 8, 1);
  const LabeledView test = random_view(32, 8, 2);
  ValuationConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(knn_shapley(train, test, cfg));
  }
  state.SetComplexityN(int64_t(n));
}

void BM_exact_shapley(benchmark::State& state) {
  const std::size_t n = std::size_t(state.range(0));
  const LabeledView train = random_view(n, 4, 3);
  const LabeledView test = random_view(4, 4, 4);
  ValuationConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(exact_shapley(train, test, cfg));
  }
}

}  // namespace

BENCHMARK(BM_knn_shapley)->RangeMultiplier(2)->Range(256, 8192)->Complexity();
BENCHMARK(BM_exact_shapley)->DenseRange(6, 12, 2)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
