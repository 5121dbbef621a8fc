#include <benchmark/benchmark.h>

#include "compsum/train.hpp"

namespace {

void BM_TrainEpoch(benchmark::State& state) {
  const auto split = compsum::make_mixture_task(compsum::MixtureSpec{}, 1024, 0, 0, 7);
  compsum::TrainConfig cfg;
  cfg.epochs = 1;
  for (auto _ : state) {
    const auto r = compsum::train_standard(split.train, {}, compsum::DifferentiableModel::mlp(20, 64, 10), cfg);
    benchmark::DoNotOptimize(r.history.back().train_loss);
  }
  state.SetItemsProcessed(state.iterations() * 1024);
}

void BM_AdvTrainEpoch(benchmark::State& state) {
  const auto split = compsum::make_margin_task(compsum::MarginSpec{}, 512, 0, 0, 8);
  compsum::TrainConfig cfg;
  cfg.epochs = 1;
  compsum::AdversarialConfig adv;
  adv.params.allow_small_nu = true;
  adv.ball = compsum::PerturbationBall::make(INFINITY, 0.5);
  cfg.adversarial = adv;
  for (auto _ : state) {
    const auto r = compsum::train_adv_comp_sum(split.train, {}, compsum::DifferentiableModel::mlp(20, 64, 2), cfg);
    benchmark::DoNotOptimize(r.history.back().train_loss);
  }
  state.SetItemsProcessed(state.iterations() * 512);
}

}  // namespace

BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AdvTrainEpoch)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
