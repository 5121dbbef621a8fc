#include <benchmark/benchmark.h>

#include <random>

#include "compsum/risk.hpp"
#include "compsum/sampling.hpp"

namespace {

void BM_BruteForceStar(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const auto n = static_cast<std::size_t>(state.range(0));
  const compsum::CondDist p = compsum::random_cond_dist(n, 1.0, rng);
  const auto spec = compsum::HypothesisSpec::score_box(n, 2.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(compsum::cond_risk_star_brute(p, compsum::Tau(1.0), spec).value);
  }
}

void BM_ClosedFormStar(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const compsum::CondDist p = compsum::random_cond_dist(static_cast<std::size_t>(state.range(0)), 1.0, rng);
  for (auto _ : state) benchmark::DoNotOptimize(compsum::cond_risk_star_closed(p, compsum::Tau(1.5)));
}

}  // namespace

BENCHMARK(BM_BruteForceStar)->Arg(3)->Arg(10)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ClosedFormStar)->Arg(3)->Arg(10)->Arg(100);

BENCHMARK_MAIN();
