#include <benchmark/benchmark.h>

#include "kgseries/butcher.hpp"
#include "kgseries/evolve.hpp"
#include "kgseries/initial_data.hpp"

namespace {

kgs::SeriesConfig make_config(int order) {
  kgs::GridSpec grid;
  grid.d = 1;
  grid.n = 64;
  grid.L = 6.283185307179586;
  grid.m = 1.0;
  kgs::SeriesConfig cfg;
  cfg.p = 2;
  cfg.lambda = 0.0625;
  cfg.grid = grid;
  cfg.data = kgs::make_cauchy_data(grid, "bandlimited:seed=1,band=2,amp=1",
                                   "bandlimited:seed=2,band=2,amp=1", 1.0, 1.0);
  cfg.T = 0.5;
  cfg.dt = 0.00390625;
  cfg.q = 1.0;
  cfg.max_order = order;
  return cfg;
}

// Full pipeline: tree enumeration, coefficient solves, weighted sum.
void BM_PartialSum(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  const kgs::SeriesConfig cfg = make_config(order);
  for (auto _ : state) {
    kgs::SeriesEngine engine(cfg);
    benchmark::DoNotOptimize(engine.partial_sum(order));
  }
}
BENCHMARK(BM_PartialSum)->DenseRange(1, 3)->ArgName("order");

// Re-summing cached coefficients at a new coupling is the sweep fast path.
void BM_PartialSumResum(benchmark::State& state) {
  const kgs::SeriesConfig cfg = make_config(3);
  kgs::SeriesEngine engine(cfg);
  benchmark::DoNotOptimize(engine.partial_sum(3));
  double lambda = 0.0625;
  for (auto _ : state) {
    benchmark::DoNotOptimize(engine.partial_sum(3, lambda));
    lambda *= 1.0000001;  // defeat any same-coupling shortcut
  }
}
BENCHMARK(BM_PartialSumResum);

void BM_FreeField(benchmark::State& state) {
  const kgs::SeriesConfig cfg = make_config(0);
  for (auto _ : state)
    benchmark::DoNotOptimize(kgs::free_field(cfg.data, cfg.T, cfg.dt));
}
BENCHMARK(BM_FreeField);

void BM_SolveRetarded(benchmark::State& state) {
  const kgs::SeriesConfig cfg = make_config(0);
  const kgs::TimeSampledField source = kgs::free_field(cfg.data, cfg.T, cfg.dt);
  for (auto _ : state) benchmark::DoNotOptimize(kgs::solve_retarded(source));
}
BENCHMARK(BM_SolveRetarded);

}  // namespace
