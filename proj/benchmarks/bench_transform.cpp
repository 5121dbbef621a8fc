#include <benchmark/benchmark.h>

#include "compsum/transform.hpp"

namespace {

void BM_TTau(benchmark::State& state) {
  const compsum::TransformParams p(compsum::Tau(static_cast<double>(state.range(0)) / 2.0), 10);
  int i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(compsum::t_tau(i / 1000.0, p));
    i = i == 1000 ? 0 : i + 1;
  }
}

void BM_GammaTau(benchmark::State& state) {
  const compsum::TransformParams p(compsum::Tau(static_cast<double>(state.range(0)) / 2.0), 10);
  const double tmax = compsum::t_tau(1.0, p);
  int i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(compsum::gamma_tau(i / 1000.0 * tmax, p));
    i = i == 1000 ? 0 : i + 1;
  }
}

}  // namespace

BENCHMARK(BM_TTau)->DenseRange(0, 4);
BENCHMARK(BM_GammaTau)->DenseRange(0, 4);

BENCHMARK_MAIN();
