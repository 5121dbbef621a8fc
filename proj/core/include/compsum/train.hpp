#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "compsum/adversarial.hpp"
#include "compsum/dataset.hpp"
#include "compsum/loss.hpp"
#include "compsum/model.hpp"

namespace compsum {

enum class Schedule { Cosine, Constant };

struct AdversarialConfig {
  AdvParams params;
  PerturbationBall ball;
};

struct TrainConfig {
  Tau tau{1.0};
  double lr0 = 0.1;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  int epochs = 20;
  std::size_t batch_size = 64;
  Schedule schedule = Schedule::Cosine;
  std::uint64_t seed = 0;
  std::optional<AdversarialConfig> adversarial;
  // Exponential parameter averaging; 0 disables it.
  double ema_decay = 0.0;
  // Robust accuracy per epoch on the held-out set; selects the checkpoint.
  std::optional<PerturbationBall> eval_ball;
  AdvParams eval_attack = eval_attack_defaults();
  int threads = 1;

  void validate() const;
  static AdvParams eval_attack_defaults();
};

// lr0 * 0.5 * (1 + cos(pi * step / total_steps)) for cosine, lr0 otherwise.
double learning_rate(const TrainConfig& cfg, std::size_t step, std::size_t total_steps);

struct EvalMetrics {
  double clean_acc = 0.0;
  std::optional<double> robust_acc;
  std::size_t count = 0;
};

// Robust accuracy counts a point only when PGD on the margin finds no
// misclassified point in the ball; the clean point is part of every attack.
EvalMetrics evaluate(const DifferentiableModel& model, const SyntheticDataset& data,
                     const std::optional<PerturbationBall>& ball = {},
                     const AdvParams& attack = TrainConfig::eval_attack_defaults(), int threads = 1);

struct EpochMetrics {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double clean_acc = 0.0;
  std::optional<double> robust_acc;
  bool checkpoint = false;
};

struct TrainResult {
  DifferentiableModel model;  // selected checkpoint
  DifferentiableModel last;   // final (or last finite) state
  std::vector<EpochMetrics> history;
  int best_epoch = -1;
  bool diverged = false;
  std::string message;
};

// Mini-batch SGD with Nesterov momentum on the mean comp-sum loss. Metrics
// are measured on validation when non-empty, on train otherwise. The
// checkpoint maximizes robust accuracy when eval_ball is set, clean accuracy
// otherwise; ties keep the earlier epoch.
TrainResult train_standard(const SyntheticDataset& train, const SyntheticDataset& validation,
                           DifferentiableModel model, const TrainConfig& cfg);

// Same loop on the smooth adversarial comp-sum loss. The deviation attack
// point is held fixed when differentiating.
TrainResult train_adv_comp_sum(const SyntheticDataset& train, const SyntheticDataset& validation,
                               DifferentiableModel model, const TrainConfig& cfg);

// Header epoch,lr,train_loss,clean_acc,robust_acc,checkpoint_flag; an empty
// robust_acc field means no ball was configured.
void write_metrics_csv(std::ostream& out, const std::vector<EpochMetrics>& history);

}  // namespace compsum
