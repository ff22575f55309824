#include <benchmark/benchmark.h>

#include "coalmine/erc.hpp"
#include "coalmine/ocf.hpp"
#include "coalmine/rng.hpp"
#include "coalmine/stackelberg.hpp"

namespace {

using namespace coalmine;

MarketContext market_of(int n_mus, int capacity) {
  SystemParams p;
  p.n_mus = n_mus;
  p.collaboration_factor = capacity;
  return MarketContext::generate(p, 42);
}

void BM_SolveErc(benchmark::State& state) {
  Rng rng(1);
  ErcInput in;
  for (int m = 0; m < state.range(0); ++m) {
    in.theta.push_back(rng.uniform(200, 1500));
    in.caps.push_back(599);
  }
  in.price = 40.0;
  for (auto _ : state) benchmark::DoNotOptimize(solve_erc(in));
}
BENCHMARK(BM_SolveErc)->Arg(4)->Arg(20)->Arg(60);

void BM_ScoreStructure(benchmark::State& state) {
  const auto market = market_of(static_cast<int>(state.range(0)), 1);
  StructureEvaluator evaluator(market, 100.0);
  const auto s = CoalitionStructure::singletons(market.params.n_mus);
  for (auto _ : state) benchmark::DoNotOptimize(evaluator.score(s));
}
BENCHMARK(BM_ScoreStructure)->Arg(12)->Arg(24);

void BM_Formation(benchmark::State& state) {
  const auto market = market_of(12, static_cast<int>(state.range(0)));
  const auto start = CoalitionStructure::singletons(12);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    StructureEvaluator evaluator(market, 200.0);
    OcfOptions options;
    options.max_passes = 500;
    benchmark::DoNotOptimize(run_formation(start, evaluator, seed++, options));
  }
}
BENCHMARK(BM_Formation)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_PriceSearchNonCoop(benchmark::State& state) {
  const auto market = market_of(20, 1);
  StackelbergOptions options;
  options.cooperative = false;
  for (auto _ : state) benchmark::DoNotOptimize(solve_stackelberg(market, 7, options));
}
BENCHMARK(BM_PriceSearchNonCoop)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
