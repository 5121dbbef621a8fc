#include <benchmark/benchmark.h>

#include <random>

#include "compsum/adversarial.hpp"

namespace {

void BM_AttackCompRho(benchmark::State& state) {
  std::mt19937_64 rng(5);
  auto model = compsum::DifferentiableModel::mlp(20, 64, 10);
  model.init_random(rng);
  const std::vector<double> x(20, 0.1);
  compsum::AdvParams adv;
  adv.pgd_steps = static_cast<int>(state.range(0));
  const auto ball = compsum::PerturbationBall::make(INFINITY, 0.1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(compsum::attack_comp_rho(model, x, 3, compsum::Tau(1.0), adv, ball).value);
  }
}

void BM_AdvZeroOne(benchmark::State& state) {
  std::mt19937_64 rng(6);
  auto model = compsum::DifferentiableModel::mlp(20, 64, 10);
  model.init_random(rng);
  const std::vector<double> x(20, -0.2);
  compsum::AdvParams attack;
  attack.pgd_steps = 40;
  const auto ball = compsum::PerturbationBall::make(2, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(compsum::adv_zero_one(model, x, 1, ball, attack));
}

}  // namespace

BENCHMARK(BM_AttackCompRho)->Arg(10)->Arg(40)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_AdvZeroOne)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
