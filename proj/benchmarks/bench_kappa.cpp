#include <benchmark/benchmark.h>

#include "relproj/random.hpp"
#include "relproj/regularity.hpp"
#include "support.hpp"

using namespace relproj;

namespace {

void BM_EstimateKappa(benchmark::State& state) {
  CounterRng rng(11);
  std::vector<LinearSubspace> c;
  for (int i = 0; i < state.range(0); ++i) c.push_back(testing::random_subspace(4, 2, rng));
  KappaOptions o;
  o.n_validation = 20000;
  for (auto _ : state) benchmark::DoNotOptimize(estimate_kappa(c, o));
}
BENCHMARK(BM_EstimateKappa)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_KappaStar(benchmark::State& state) {
  CounterRng rng(12);
  std::vector<LinearSubspace> c;
  for (int i = 0; i < 3; ++i) c.push_back(testing::random_subspace(4, 2, rng));
  KappaOptions o;
  o.n_validation = 20000;
  for (auto _ : state) benchmark::DoNotOptimize(kappa_star(c, o));
}
BENCHMARK(BM_KappaStar)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
