#include "compsum/train.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>

#include "compsum/csv.hpp"

namespace compsum {

AdvParams TrainConfig::eval_attack_defaults() {
  AdvParams a;
  a.pgd_steps = 40;
  a.restarts = 1;
  a.seed = 0xe7a1;
  a.allow_small_nu = true;
  return a;
}

void TrainConfig::validate() const {
  if (!(lr0 > 0.0) || !std::isfinite(lr0)) throw std::domain_error("lr0 must be finite and > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::domain_error("momentum must lie in [0, 1)");
  if (!(weight_decay >= 0.0)) throw std::domain_error("weight_decay must be >= 0");
  if (epochs < 1) throw std::domain_error("epochs must be >= 1");
  if (batch_size == 0) throw std::domain_error("batch_size must be >= 1");
  if (!(ema_decay >= 0.0 && ema_decay < 1.0)) throw std::domain_error("ema_decay must lie in [0, 1)");
  if (threads < 1) throw std::domain_error("threads must be >= 1");
}

double learning_rate(const TrainConfig& cfg, std::size_t step, std::size_t total_steps) {
  if (cfg.schedule == Schedule::Constant || total_steps == 0) return cfg.lr0;
  const double t = static_cast<double>(std::min(step, total_steps)) / static_cast<double>(total_steps);
  return cfg.lr0 * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Runs body(i) for i in [0, count) across threads; body must only touch
// index-owned state.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  const std::size_t t = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), count);
  if (t <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(t);
  for (std::size_t w = 0; w < t; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += t) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void check_data(const SyntheticDataset& data, const DifferentiableModel& model) {
  if (data.size() == 0) throw std::invalid_argument("training set is empty");
  if (data.dim != model.input_dim() || data.num_labels != model.num_labels()) {
    throw std::invalid_argument("dataset shape does not match the model");
  }
}

// Per-example objective: adds d(loss)/d(theta) into grad, returns the loss.
using ExampleStep = std::function<double(const DifferentiableModel&, std::size_t example,
                                         std::uint64_t step, std::span<double> grad)>;

TrainResult run_sgd(const SyntheticDataset& train, const SyntheticDataset& validation,
                    DifferentiableModel model, const TrainConfig& cfg, const ExampleStep& example) {
  cfg.validate();
  check_data(train, model);
  const SyntheticDataset& held = validation.size() > 0 ? validation : train;

  const std::size_t m = train.size();
  const std::size_t batches = (m + cfg.batch_size - 1) / cfg.batch_size;
  const std::size_t total = batches * static_cast<std::size_t>(cfg.epochs);
  const std::size_t np = model.num_params();

  std::vector<double> velocity(np, 0.0);
  std::vector<double> grad(np);
  std::vector<double> shadow(model.parameters().begin(), model.parameters().end());
  std::vector<double> last_finite = shadow;
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(mix(cfg.seed, 0x5f));

  TrainResult result{model, model, {}, -1, false, {}};
  double best_score = -1.0;
  std::size_t step = 0;
  DifferentiableModel averaged = model;

  for (int epoch = 0; epoch < cfg.epochs && !result.diverged; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    double lr = learning_rate(cfg, step, total);
    for (std::size_t b = 0; b < batches; ++b, ++step) {
      lr = learning_rate(cfg, step, total);
      const std::size_t lo = b * cfg.batch_size;
      const std::size_t hi = std::min(m, lo + cfg.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      double batch_loss = 0.0;
      try {
        for (std::size_t k = lo; k < hi; ++k) {
          batch_loss += example(model, order[k], step, grad);
        }
      } catch (const std::domain_error& e) {
        result.diverged = true;
        result.message = std::string("non-finite forward pass: ") + e.what();
        break;
      }
      const double inv = 1.0 / static_cast<double>(hi - lo);
      if (!std::isfinite(batch_loss) || !all_finite(grad)) {
        result.diverged = true;
        result.message = "non-finite loss at step " + std::to_string(step);
        break;
      }
      loss_sum += batch_loss;
      auto p = model.parameters();
      for (std::size_t i = 0; i < np; ++i) {
        const double g = grad[i] * inv + cfg.weight_decay * p[i];
        velocity[i] = cfg.momentum * velocity[i] + g;
        p[i] -= lr * (g + cfg.momentum * velocity[i]);
      }
      if (!all_finite(p)) {
        result.diverged = true;
        result.message = "non-finite parameters at step " + std::to_string(step);
        break;
      }
      last_finite.assign(p.begin(), p.end());
      if (cfg.ema_decay > 0.0) {
        for (std::size_t i = 0; i < np; ++i) {
          shadow[i] = cfg.ema_decay * shadow[i] + (1.0 - cfg.ema_decay) * p[i];
        }
      }
    }
    if (result.diverged) {
      model.set_parameters(last_finite);
      break;
    }
    const DifferentiableModel* scored = &model;
    if (cfg.ema_decay > 0.0) {
      averaged.set_parameters(shadow);
      scored = &averaged;
    }
    EpochMetrics em;
    em.epoch = epoch + 1;
    em.lr = lr;
    em.train_loss = loss_sum / static_cast<double>(m);
    const EvalMetrics ev = evaluate(*scored, held, cfg.eval_ball, cfg.eval_attack, cfg.threads);
    em.clean_acc = ev.clean_acc;
    em.robust_acc = ev.robust_acc;
    const double score = ev.robust_acc.value_or(ev.clean_acc);
    if (score > best_score) {
      best_score = score;
      em.checkpoint = true;
      result.best_epoch = em.epoch;
      result.model = *scored;
    }
    result.history.push_back(em);
  }
  result.last = model;
  if (cfg.ema_decay > 0.0 && !result.diverged) result.last.set_parameters(shadow);
  if (result.best_epoch < 0) result.model = result.last;
  return result;
}

}  // namespace

EvalMetrics evaluate(const DifferentiableModel& model, const SyntheticDataset& data,
                     const std::optional<PerturbationBall>& ball, const AdvParams& attack,
                     int threads) {
  EvalMetrics out;
  out.count = data.size();
  if (data.size() == 0) return out;
  std::vector<int> clean(data.size(), 0);
  std::vector<int> robust(data.size(), 0);
  parallel_for(data.size(), threads, [&](std::size_t i) {
    const auto& x = data.inputs[i];
    const std::size_t y = data.labels[i];
    // Non-finite scores count as errors.
    try {
      clean[i] = predicted_label(model.forward(x)) == y ? 1 : 0;
      if (ball && clean[i] == 1) {
        AdvParams a = attack;
        a.seed = mix(attack.seed, i);
        robust[i] = adv_zero_one(model, x, y, *ball, a) == 0 ? 1 : 0;
      }
    } catch (const std::domain_error&) {
      clean[i] = 0;
      robust[i] = 0;
    }
  });
  const double count = static_cast<double>(data.size());
  out.clean_acc = std::accumulate(clean.begin(), clean.end(), 0.0) / count;
  if (ball) out.robust_acc = std::accumulate(robust.begin(), robust.end(), 0.0) / count;
  return out;
}

TrainResult train_standard(const SyntheticDataset& train, const SyntheticDataset& validation,
                           DifferentiableModel model, const TrainConfig& cfg) {
  if (cfg.adversarial) throw std::invalid_argument("train_standard: adversarial settings present");
  const std::size_t n = model.num_labels();
  ExampleStep step = [&, n](const DifferentiableModel& h, std::size_t i, std::uint64_t,
                            std::span<double> grad) {
    const auto& x = train.inputs[i];
    const std::vector<double> s = h.forward(x);
    std::vector<double> g(n);
    const double loss = comp_sum_loss_grad(s, train.labels[i], cfg.tau, g);
    h.param_vjp(x, g, grad);
    return loss;
  };
  return run_sgd(train, validation, std::move(model), cfg, step);
}

TrainResult train_adv_comp_sum(const SyntheticDataset& train, const SyntheticDataset& validation,
                               DifferentiableModel model, const TrainConfig& cfg) {
  if (!cfg.adversarial) throw std::invalid_argument("train_adv_comp_sum: adversarial settings absent");
  const AdversarialConfig adv = *cfg.adversarial;
  adv.params.validate(model.num_labels());
  const std::size_t n = model.num_labels();
  const double rho = adv.params.rho;
  ExampleStep step = [&, n, rho](const DifferentiableModel& h, std::size_t i, std::uint64_t t,
                                 std::span<double> grad) {
    const auto& x = train.inputs[i];
    const std::size_t y = train.labels[i];
    const std::vector<double> s = h.forward(x);
    std::vector<double> scaled(s);
    for (double& v : scaled) v /= rho;
    std::vector<double> up(n);
    double loss = comp_sum_loss_grad(scaled, y, cfg.tau, up);
    for (double& v : up) v /= rho;
    if (adv.ball.gamma > 0.0 && adv.params.nu > 0.0) {
      AdvParams a = adv.params;
      a.seed = mix(mix(adv.params.seed, t), i);
      const AttackResult r = attack_deviation(h, x, y, a, adv.ball);
      if (r.value > 0.0) {
        const std::vector<double> sp = h.forward(r.point);
        std::vector<double> up_adv(n, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
          if (j == y) continue;
          const double dev = ((sp[y] - sp[j]) - (s[y] - s[j])) / r.value;
          up_adv[y] += adv.params.nu * dev;
          up_adv[j] -= adv.params.nu * dev;
        }
        h.param_vjp(r.point, up_adv, grad);
        for (std::size_t j = 0; j < n; ++j) up[j] -= up_adv[j];
        loss += adv.params.nu * r.value;
      }
    }
    h.param_vjp(x, up, grad);
    return loss;
  };
  return run_sgd(train, validation, std::move(model), cfg, step);
}

void write_metrics_csv(std::ostream& out, const std::vector<EpochMetrics>& history) {
  csv::write_row(out, {"epoch", "lr", "train_loss", "clean_acc", "robust_acc", "checkpoint_flag"});
  for (const auto& e : history) {
    csv::write_row(out, {std::to_string(e.epoch), csv::format_real(e.lr),
                         csv::format_real(e.train_loss), csv::format_real(e.clean_acc),
                         e.robust_acc ? csv::format_real(*e.robust_acc) : std::string(),
                         e.checkpoint ? "1" : "0"});
  }
}

}  // namespace compsum
