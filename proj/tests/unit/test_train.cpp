#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "compsum/train.hpp"

using namespace compsum;

namespace {

SyntheticDataset one_dim_task(std::size_t m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  SyntheticDataset d;
  d.num_labels = 2;
  d.dim = 1;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t y = i % 2;
    d.inputs.push_back({(y == 1 ? 1.0 : -1.0) + 0.6 * g(rng)});
    d.labels.push_back(y);
  }
  return d;
}

TrainConfig quick_config(double tau = 1.0) {
  TrainConfig cfg;
  cfg.tau = Tau(tau);
  cfg.epochs = 5;
  cfg.batch_size = 32;
  cfg.seed = 3;
  return cfg;
}

}  // namespace

TEST(Dataset, SplitsAreDeterministicAndDisjointStreams) {
  const auto a = make_margin_task(MarginSpec{}, 50, 20, 20, 7);
  const auto b = make_margin_task(MarginSpec{}, 50, 20, 20, 7);
  EXPECT_EQ(a.train.inputs, b.train.inputs);
  EXPECT_EQ(a.test.labels, b.test.labels);
  EXPECT_NE(a.train.inputs[0], a.validation.inputs[0]);
}

TEST(Dataset, MarginTaskHasDesignedGap) {
  const MarginSpec spec;
  const auto s = make_margin_task(spec, 500, 0, 0, 1);
  EXPECT_EQ(s.train.dim, spec.dim);
  for (std::size_t i = 0; i < s.train.size(); ++i) {
    const double sign = s.train.labels[i] == 1 ? 1.0 : -1.0;
    EXPECT_GE(sign * s.train.inputs[i][0], spec.designed_gamma());
  }
}

TEST(Dataset, MixtureMeansSharedAcrossSplits) {
  const MixtureSpec spec;
  const auto m1 = mixture_means(spec, 11);
  const auto m2 = mixture_means(spec, 11);
  EXPECT_EQ(m1, m2);
  EXPECT_EQ(m1.size(), spec.num_labels);
  const auto split = make_mixture_task(spec, 100, 10, 10, 11);
  EXPECT_EQ(split.train.size(), 100u);
  for (std::size_t y : split.train.labels) EXPECT_LT(y, spec.num_labels);
}

TEST(Schedule, CosineEndpoints) {
  TrainConfig cfg;
  cfg.lr0 = 0.2;
  EXPECT_DOUBLE_EQ(learning_rate(cfg, 0, 100), 0.2);
  EXPECT_NEAR(learning_rate(cfg, 50, 100), 0.1, 1e-15);
  EXPECT_NEAR(learning_rate(cfg, 100, 100), 0.0, 1e-15);
  cfg.schedule = Schedule::Constant;
  EXPECT_DOUBLE_EQ(learning_rate(cfg, 70, 100), 0.2);
}

TEST(Config, Validation) {
  TrainConfig cfg;
  cfg.epochs = 0;
  EXPECT_ANY_THROW(cfg.validate());
  cfg = TrainConfig{};
  cfg.momentum = 1.0;
  EXPECT_ANY_THROW(cfg.validate());
  cfg = TrainConfig{};
  EXPECT_NO_THROW(cfg.validate());
}

TEST(Train, SeparableDataReachesHighAccuracy) {
  const auto split = make_margin_task(MarginSpec{}, 600, 200, 400, 5);
  auto cfg = quick_config();
  const auto r = train_standard(split.train, split.validation,
                                DifferentiableModel::linear(split.train.dim, 2), cfg);
  EXPECT_FALSE(r.diverged);
  EXPECT_GE(evaluate(r.model, split.test).clean_acc, 0.99);
}

TEST(Train, LossDecreases) {
  const auto split = make_mixture_task(MixtureSpec{}, 1000, 200, 0, 2);
  auto cfg = quick_config(1.0);
  const auto r = train_standard(split.train, split.validation,
                                DifferentiableModel::linear(split.train.dim, 10), cfg);
  ASSERT_FALSE(r.diverged) << r.message;
  ASSERT_EQ(r.history.size(), 5u);
  EXPECT_LT(r.history.back().train_loss, r.history.front().train_loss);
}

TEST(Train, DivergenceStopsWithFiniteParameters) {
  const auto split = make_mixture_task(MixtureSpec{}, 300, 50, 0, 2);
  auto cfg = quick_config(0.0);
  cfg.lr0 = 50.0;
  const auto r = train_standard(split.train, split.validation,
                                DifferentiableModel::linear(split.train.dim, 10), cfg);
  ASSERT_TRUE(r.diverged);
  EXPECT_FALSE(r.message.empty());
  EXPECT_LT(r.history.size(), 5u);
  for (double v : r.last.parameters()) EXPECT_TRUE(std::isfinite(v));
  for (double v : r.model.parameters()) EXPECT_TRUE(std::isfinite(v));
}

TEST(Train, BitwiseDeterministic) {
  const auto split = make_mixture_task(MixtureSpec{}, 300, 100, 0, 4);
  auto cfg = quick_config();
  const auto a = train_standard(split.train, split.validation,
                                DifferentiableModel::mlp(split.train.dim, 8, 10), cfg);
  const auto b = train_standard(split.train, split.validation,
                                DifferentiableModel::mlp(split.train.dim, 8, 10), cfg);
  EXPECT_TRUE(std::equal(a.model.parameters().begin(), a.model.parameters().end(),
                         b.model.parameters().begin()));
  std::ostringstream ma, mb;
  write_metrics_csv(ma, a.history);
  write_metrics_csv(mb, b.history);
  EXPECT_EQ(ma.str(), mb.str());
}

TEST(Train, CheckpointIsBestEpochEarliestOnTies) {
  const auto split = make_mixture_task(MixtureSpec{}, 300, 100, 0, 6);
  auto cfg = quick_config();
  cfg.epochs = 6;
  const auto r = train_standard(split.train, split.validation,
                                DifferentiableModel::linear(split.train.dim, 10), cfg);
  ASSERT_GE(r.best_epoch, 1);
  int best = 1;
  for (const auto& e : r.history) {
    if (e.clean_acc > r.history[best - 1].clean_acc) best = e.epoch;
  }
  EXPECT_EQ(r.best_epoch, best);
  // Flags mark every improvement; the last flag is the selected epoch.
  int last_flag = 0;
  for (const auto& e : r.history) {
    if (e.checkpoint) last_flag = e.epoch;
  }
  EXPECT_EQ(last_flag, best);
  EXPECT_DOUBLE_EQ(evaluate(r.model, split.validation).clean_acc, r.history[best - 1].clean_acc);
}

TEST(Train, AdversarialWithZeroRadiusMatchesStandard) {
  const auto split = make_mixture_task(MixtureSpec{}, 200, 50, 0, 8);
  auto cfg = quick_config(0.7);
  cfg.epochs = 3;
  const auto std_run = train_standard(split.train, split.validation,
                                      DifferentiableModel::linear(split.train.dim, 10), cfg);
  AdversarialConfig adv;
  adv.params.rho = 1.0;
  adv.params.nu = 3.0;
  adv.ball = PerturbationBall::make(2, 0.0);
  cfg.adversarial = adv;
  const auto adv_run = train_adv_comp_sum(split.train, split.validation,
                                          DifferentiableModel::linear(split.train.dim, 10), cfg);
  const auto pa = std_run.last.parameters();
  const auto pb = adv_run.last.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_NEAR(pa[i], pb[i], 1e-12);
}

TEST(Evaluate, RobustNeverExceedsClean) {
  const auto split = make_mixture_task(MixtureSpec{}, 200, 200, 0, 9);
  const auto r = train_standard(split.train, split.validation,
                                DifferentiableModel::linear(split.train.dim, 10), quick_config());
  for (double g : {0.0, 0.1, 0.5}) {
    const auto m = evaluate(r.model, split.validation, PerturbationBall::make(2, g));
    ASSERT_TRUE(m.robust_acc.has_value());
    EXPECT_LE(*m.robust_acc, m.clean_acc);
    if (g == 0.0) EXPECT_DOUBLE_EQ(*m.robust_acc, m.clean_acc);
  }
}

TEST(Evaluate, PgdMatchesExactOnOneDimensionalLinearModel) {
  const auto data = one_dim_task(400, 12);
  auto model = DifferentiableModel::linear(1, 2);
  model.set_parameters(std::vector<double>{-1.3, 1.1, 0.05, -0.02});
  for (double g : {0.1, 0.4, 0.9}) {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      ok += exact_adv_zero_one_1d(model, data.inputs[i][0], data.labels[i], g) == 0 ? 1 : 0;
    }
    const auto m = evaluate(model, data, PerturbationBall::make(INFINITY, g));
    EXPECT_DOUBLE_EQ(*m.robust_acc, static_cast<double>(ok) / data.size()) << "gamma=" << g;
  }
}

TEST(Evaluate, ThreadCountDoesNotChangeResults) {
  const auto split = make_mixture_task(MixtureSpec{}, 100, 150, 0, 13);
  std::mt19937_64 rng(1);
  auto model = DifferentiableModel::mlp(split.train.dim, 6, 10);
  model.init_random(rng);
  const auto ball = PerturbationBall::make(INFINITY, 0.1);
  const auto a = evaluate(model, split.validation, ball, TrainConfig::eval_attack_defaults(), 1);
  const auto b = evaluate(model, split.validation, ball, TrainConfig::eval_attack_defaults(), 3);
  EXPECT_EQ(a.clean_acc, b.clean_acc);
  EXPECT_EQ(*a.robust_acc, *b.robust_acc);
}

TEST(MetricsCsv, EmptyRobustFieldWithoutBall) {
  std::vector<EpochMetrics> h(1);
  h[0].epoch = 1;
  h[0].lr = 0.1;
  h[0].checkpoint = true;
  std::ostringstream os;
  write_metrics_csv(os, h);
  EXPECT_EQ(os.str(), "epoch,lr,train_loss,clean_acc,robust_acc,checkpoint_flag\r\n1,0.10000000000000001,0,0,,1\r\n");
}
