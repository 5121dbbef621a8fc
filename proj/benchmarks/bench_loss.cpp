#include <benchmark/benchmark.h>

#include <random>

#include "compsum/loss.hpp"
#include "compsum/sampling.hpp"

namespace {

void BM_LossGrad(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto h = compsum::random_scores(static_cast<std::size_t>(state.range(0)), 2.0, rng);
  std::vector<double> g(h.size());
  const compsum::Tau tau(static_cast<double>(state.range(1)) / 2.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(compsum::comp_sum_loss_grad(h, 0, tau, g));
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations());
}

void BM_Loss(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto h = compsum::random_scores(static_cast<std::size_t>(state.range(0)), 2.0, rng);
  const compsum::Tau tau(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(compsum::comp_sum_loss(h, 1, tau));
}

}  // namespace

BENCHMARK(BM_LossGrad)->ArgsProduct({{2, 10, 100, 1000}, {0, 2, 3, 4}});
BENCHMARK(BM_Loss)->Arg(10)->Arg(1000);

BENCHMARK_MAIN();
