#include <benchmark/benchmark.h>

#include "relproj/engine.hpp"
#include "relproj/random.hpp"
#include "support.hpp"

using namespace relproj;

namespace {

std::vector<AffineSubspace> collection(Index d, std::size_t ell) {
  CounterRng rng(5);
  std::vector<AffineSubspace> c;
  for (std::size_t i = 0; i < ell; ++i) c.push_back(testing::random_affine(d, d / 2, rng, 2.0));
  return c;
}

void BM_IterateNormsOnly(benchmark::State& state) {
  const auto d = static_cast<Index>(state.range(0));
  const auto c = collection(d, 4);
  const Vector x0 = Vector::Ones(d);
  const auto sched = Schedule::random(1, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(iterate(c, sched, x0, 10000, TraceStorage::norms_only));
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_IterateNormsOnly)->Arg(2)->Arg(10)->Arg(50);

void BM_TailNorms(benchmark::State& state) {
  const auto c = collection(5, 3);
  const auto sched = Schedule::random(2, 1.5);
  for (auto _ : state) benchmark::DoNotOptimize(tail_norms(c, sched, 10000));
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_TailNorms);

void BM_SegmentCycles(benchmark::State& state) {
  CounterRng rng(3);
  std::vector<std::size_t> word(static_cast<std::size_t>(state.range(0)));
  for (auto& w : word) w = rng.below(4);
  for (auto _ : state) benchmark::DoNotOptimize(segment_cycles(word, 4));
}
BENCHMARK(BM_SegmentCycles)->Arg(100)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
