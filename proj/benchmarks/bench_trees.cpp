#include <benchmark/benchmark.h>

#include "kgseries/ptree.hpp"

namespace {

void BM_CountTrees(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const int N = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(kgs::count_trees(p, N));
}
BENCHMARK(BM_CountTrees)
    ->ArgsProduct({{2, 3}, {4, 8, 16}})
    ->ArgNames({"p", "N"});

void BM_EnumerateTrees(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const int N = static_cast<int>(state.range(1));
  for (auto _ : state) {
    auto trees = kgs::enumerate_trees(p, N);
    benchmark::DoNotOptimize(trees.data());
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(kgs::count_trees(p, N)));
}
BENCHMARK(BM_EnumerateTrees)
    ->ArgsProduct({{2, 3}, {4, 6}})
    ->Args({2, 8})
    ->ArgNames({"p", "N"});

void BM_TreeKey(benchmark::State& state) {
  const auto trees = kgs::enumerate_trees(2, static_cast<int>(state.range(0)));
  for (auto _ : state)
    for (const auto& b : trees) benchmark::DoNotOptimize(b.key());
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(trees.size()));
}
BENCHMARK(BM_TreeKey)->Arg(6)->ArgName("N");

}  // namespace

BENCHMARK_MAIN();
