#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "kgseries/field.hpp"
#include "kgseries/grid.hpp"
#include "kgseries/spectral.hpp"

namespace {

kgs::GridSpec make_grid(int d, int n) {
  kgs::GridSpec g;
  g.d = d;
  g.n = n;
  g.L = 6.283185307179586;
  g.m = 1.0;
  return g;
}

std::vector<double> random_samples(std::size_t sites) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(sites);
  for (double& x : v) x = u(rng);
  return v;
}

void BM_SpectralRoundtrip(benchmark::State& state) {
  const auto grid = make_grid(static_cast<int>(state.range(0)),
                              static_cast<int>(state.range(1)));
  const kgs::SpectralTransform tr(grid);
  const std::vector<double> in = random_samples(grid.sites());
  std::vector<std::complex<double>> spec(tr.spectral_size());
  std::vector<double> out(grid.sites());
  for (auto _ : state) {
    tr.forward(in.data(), spec.data());
    tr.inverse(spec.data(), out.data());
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(grid.sites()));
}
BENCHMARK(BM_SpectralRoundtrip)
    ->Args({1, 128})
    ->Args({1, 1024})
    ->Args({2, 64})
    ->Args({3, 16})
    ->ArgNames({"d", "n"});

void BM_SobolevNorm(benchmark::State& state) {
  const auto grid = make_grid(1, static_cast<int>(state.range(0)));
  kgs::FieldSnapshot f(grid);
  f.values = random_samples(grid.sites());
  for (auto _ : state) benchmark::DoNotOptimize(kgs::sobolev_norm(f, 1.0));
}
BENCHMARK(BM_SobolevNorm)->Arg(128)->Arg(1024)->ArgName("n");

}  // namespace
