#include <benchmark/benchmark.h>

#include "relproj/random.hpp"
#include "relproj/subspaces.hpp"
#include "support.hpp"

using namespace relproj;

namespace {

void BM_Project(benchmark::State& state) {
  CounterRng rng(21);
  const auto d = static_cast<Index>(state.range(0));
  const auto l = testing::random_subspace(d, d / 2, rng);
  const Vector x = rng.normal_vector(d);
  for (auto _ : state) benchmark::DoNotOptimize(l.project(x));
}
BENCHMARK(BM_Project)->Arg(4)->Arg(32)->Arg(256);

void BM_Intersect(benchmark::State& state) {
  CounterRng rng(22);
  const auto d = static_cast<Index>(state.range(0));
  std::vector<LinearSubspace> c;
  for (int i = 0; i < 3; ++i) c.push_back(testing::random_subspace(d, d - 2, rng));
  for (auto _ : state) benchmark::DoNotOptimize(intersect(c));
}
BENCHMARK(BM_Intersect)->Arg(8)->Arg(64);

void BM_OperatorNorm(benchmark::State& state) {
  CounterRng rng(23);
  const auto d = static_cast<Index>(state.range(0));
  const Matrix m = rng.normal_matrix(d, d);
  for (auto _ : state) benchmark::DoNotOptimize(operator_norm(m));
}
BENCHMARK(BM_OperatorNorm)->Arg(8)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
