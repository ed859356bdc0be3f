#include <benchmark/benchmark.h>

#include "kgseries/fock.hpp"

namespace {

kgs::QuantumLatticeSpec make_spec(int modes, int n_max) {
  kgs::QuantumLatticeSpec spec;
  spec.d = 1;
  spec.modes = modes;
  spec.n_max = n_max;
  spec.L = 1.0;
  spec.m = 1.0;
  spec.t0 = 0.0;
  return spec;
}

void BM_FieldOperator(benchmark::State& state) {
  const auto spec = make_spec(static_cast<int>(state.range(0)),
                              static_cast<int>(state.range(1)));
  for (auto _ : state)
    benchmark::DoNotOptimize(kgs::free_field_op(spec, 0.3, 0.1));
}
BENCHMARK(BM_FieldOperator)
    ->Args({1, 8})
    ->Args({3, 2})
    ->Args({3, 3})
    ->ArgNames({"modes", "nmax"});

void BM_OperatorProduct(benchmark::State& state) {
  const auto spec = make_spec(static_cast<int>(state.range(0)),
                              static_cast<int>(state.range(1)));
  const kgs::ModeOperator A = kgs::free_field_op(spec, 0.3, 0.1);
  const kgs::ModeOperator B = kgs::free_field_op(spec, 0.7, 0.2);
  for (auto _ : state) {
    const kgs::ModeOperator C = A * B;
    benchmark::DoNotOptimize(C.data());
  }
}
BENCHMARK(BM_OperatorProduct)
    ->Args({1, 8})
    ->Args({3, 2})
    ->Args({3, 3})
    ->ArgNames({"modes", "nmax"});

// Quadrature cost scales like (t/dtau)^order operator products.
void BM_DysonU(benchmark::State& state) {
  const auto spec = make_spec(1, 6);
  const double dtau = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(kgs::dyson_U(spec, 2, 0.5, 2, dtau));
}
BENCHMARK(BM_DysonU)->Arg(16)->Arg(32)->ArgName("inv_dtau");

}  // namespace
