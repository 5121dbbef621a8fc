#include "compsum/adversarial.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace compsum {

namespace {

// Value at xp; writes the ascent gradient with respect to xp.
using AscentObjective = std::function<double(std::span<const double>, std::vector<double>&)>;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t k) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (k + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

bool all_zero(const std::vector<double>& g) {
  return std::all_of(g.begin(), g.end(), [](double v) { return v == 0.0; });
}

void ascent_step(std::span<double> xp, const std::vector<double>& g, PNorm norm, double alpha) {
  switch (norm) {
    case PNorm::LInf:
      for (std::size_t i = 0; i < xp.size(); ++i) {
        xp[i] += alpha * static_cast<double>((g[i] > 0.0) - (g[i] < 0.0));
      }
      break;
    case PNorm::L2: {
      const double n2 = norm_of(g, PNorm::L2);
      for (std::size_t i = 0; i < xp.size(); ++i) xp[i] += alpha * g[i] / n2;
      break;
    }
    case PNorm::L1: {
      std::size_t k = 0;
      for (std::size_t i = 1; i < g.size(); ++i) {
        if (std::abs(g[i]) > std::abs(g[k])) k = i;
      }
      xp[k] += alpha * (g[k] > 0.0 ? 1.0 : -1.0);
      break;
    }
  }
}

// Projected gradient ascent. The clean point is always evaluated; each
// restart starts from a random point drawn from a stream that depends only on
// (seed, restart), so more steps never lower the best value.
AttackResult pgd_ascent(const AscentObjective& f, const AscentObjective& fallback,
                        std::span<const double> x, const PerturbationBall& ball,
                        const AdvParams& adv) {
  std::vector<double> g;
  AttackResult best{f(x, g), std::vector<double>(x.begin(), x.end())};
  if (ball.gamma == 0.0 || adv.pgd_steps < 0) return best;
  const double alpha = adv.step_size(ball.gamma);
  std::vector<double> fb;
  for (int r = 0; r < adv.restarts; ++r) {
    std::mt19937_64 rng(mix_seed(adv.seed, static_cast<std::uint64_t>(r)));
    std::vector<double> xp = random_point_in_ball(x, ball, rng);
    double v = f(xp, g);
    if (v > best.value) best = {v, xp};
    for (int s = 0; s < adv.pgd_steps; ++s) {
      const std::vector<double>* dir = &g;
      if (all_zero(g)) {
        fallback(xp, fb);
        if (all_zero(fb)) break;
        dir = &fb;
      }
      ascent_step(xp, *dir, ball.norm, alpha);
      project_to_ball(xp, x, ball);
      v = f(xp, g);
      if (v > best.value) best = {v, xp};
    }
  }
  return best;
}

// Gradient of max_{y' != y} h(y') - h(y) with respect to the input.
AscentObjective margin_objective(const DifferentiableModel& model, std::size_t y) {
  return [&model, y](std::span<const double> xp, std::vector<double>& g) {
    const std::vector<double> s = model.forward(xp);
    std::size_t other = y == 0 ? 1 : 0;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (j != y && s[j] >= s[other]) other = j;
    }
    std::vector<double> up(s.size(), 0.0);
    up[other] = 1.0;
    up[y] = -1.0;
    g = model.input_vjp(xp, up);
    return s[other] - s[y];
  };
}

void check_ball_input(const DifferentiableModel& model, std::span<const double> x, std::size_t y) {
  if (x.size() != model.input_dim()) throw std::invalid_argument("input dimension mismatch");
  if (y >= model.num_labels()) throw std::invalid_argument("label out of range");
}

}  // namespace

PerturbationBall PerturbationBall::make(double p, double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw std::domain_error("perturbation radius must be finite and >= 0");
  }
  PerturbationBall b;
  b.gamma = gamma;
  if (p == 1.0) {
    b.norm = PNorm::L1;
  } else if (p == 2.0) {
    b.norm = PNorm::L2;
  } else if (std::isinf(p) && p > 0) {
    b.norm = PNorm::LInf;
  } else {
    throw std::domain_error("only p in {1, 2, inf} is supported");
  }
  return b;
}

double PerturbationBall::p_value() const noexcept {
  switch (norm) {
    case PNorm::L1:
      return 1.0;
    case PNorm::L2:
      return 2.0;
    case PNorm::LInf:
      break;
  }
  return std::numeric_limits<double>::infinity();
}

double norm_of(std::span<const double> v, PNorm norm) {
  double s = 0.0;
  switch (norm) {
    case PNorm::L1:
      for (double x : v) s += std::abs(x);
      return s;
    case PNorm::L2:
      for (double x : v) s += x * x;
      return std::sqrt(s);
    case PNorm::LInf:
      for (double x : v) s = std::max(s, std::abs(x));
      return s;
  }
  return s;
}

double dual_norm_of(std::span<const double> v, PNorm norm) {
  switch (norm) {
    case PNorm::L1:
      return norm_of(v, PNorm::LInf);
    case PNorm::L2:
      return norm_of(v, PNorm::L2);
    case PNorm::LInf:
      return norm_of(v, PNorm::L1);
  }
  return 0.0;
}

void project_to_ball(std::span<double> x, std::span<const double> center,
                     const PerturbationBall& ball) {
  const std::size_t d = x.size();
  std::vector<double> delta(d);
  for (std::size_t i = 0; i < d; ++i) delta[i] = x[i] - center[i];
  const double g = ball.gamma;
  switch (ball.norm) {
    case PNorm::LInf:
      for (double& v : delta) v = std::clamp(v, -g, g);
      break;
    case PNorm::L2: {
      const double n2 = norm_of(delta, PNorm::L2);
      if (n2 > g) {
        for (double& v : delta) v *= g / n2;
      }
      break;
    }
    case PNorm::L1: {
      if (norm_of(delta, PNorm::L1) <= g) break;
      if (g == 0.0) {
        std::fill(delta.begin(), delta.end(), 0.0);
        break;
      }
      // Sort-based simplex projection of |delta|.
      std::vector<double> u(d);
      for (std::size_t i = 0; i < d; ++i) u[i] = std::abs(delta[i]);
      std::sort(u.begin(), u.end(), std::greater<>());
      double cum = 0.0;
      double theta = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        cum += u[k];
        const double t = (cum - g) / static_cast<double>(k + 1);
        if (u[k] - t > 0.0) theta = t;
      }
      for (double& v : delta) {
        const double m = std::max(std::abs(v) - theta, 0.0);
        v = v < 0.0 ? -m : m;
      }
      break;
    }
  }
  for (std::size_t i = 0; i < d; ++i) x[i] = center[i] + delta[i];
}

std::vector<double> random_point_in_ball(std::span<const double> center,
                                         const PerturbationBall& ball, std::mt19937_64& rng) {
  const std::size_t d = center.size();
  std::vector<double> x(center.begin(), center.end());
  if (ball.gamma == 0.0) return x;
  switch (ball.norm) {
    case PNorm::LInf: {
      std::uniform_real_distribution<double> u(-ball.gamma, ball.gamma);
      for (double& v : x) v += u(rng);
      break;
    }
    case PNorm::L2: {
      std::normal_distribution<double> gauss(0.0, 1.0);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      std::vector<double> dir(d);
      for (double& v : dir) v = gauss(rng);
      const double n2 = norm_of(dir, PNorm::L2);
      const double radius = ball.gamma * std::pow(u(rng), 1.0 / static_cast<double>(d));
      for (std::size_t i = 0; i < d; ++i) x[i] += n2 > 0.0 ? radius * dir[i] / n2 : 0.0;
      break;
    }
    case PNorm::L1: {
      std::exponential_distribution<double> e(1.0);
      std::vector<double> w(d + 1);
      for (double& v : w) v = e(rng);
      const double total = std::accumulate(w.begin(), w.end(), 0.0);
      for (std::size_t i = 0; i < d; ++i) {
        const double sign = (rng() & 1u) ? 1.0 : -1.0;
        x[i] += sign * ball.gamma * w[i] / total;
      }
      break;
    }
  }
  return x;
}

AdvParams AdvParams::defaults(std::size_t n) {
  AdvParams p;
  p.rho = 1.0;
  p.nu = std::max(1.0, min_nu(n, p.rho));
  return p;
}

double AdvParams::min_nu(std::size_t n, double rho) {
  return std::sqrt(static_cast<double>(n - 1)) / rho;
}

void AdvParams::validate(std::size_t n) const {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw std::domain_error("rho must be finite and > 0");
  if (!(nu >= 0.0) || !std::isfinite(nu)) throw std::domain_error("nu must be finite and >= 0");
  if (!allow_small_nu && nu < min_nu(n, rho) * (1.0 - 1e-12)) {
    throw std::domain_error("nu = " + std::to_string(nu) + " is below sqrt(n - 1) / rho = " +
                            std::to_string(min_nu(n, rho)));
  }
  if (pgd_steps < 0) throw std::domain_error("pgd_steps must be >= 0");
  if (restarts < 0) throw std::domain_error("restarts must be >= 0");
  if (!(pgd_step_size >= 0.0)) throw std::domain_error("pgd_step_size must be >= 0");
}

double AdvParams::step_size(double gamma) const {
  if (pgd_step_size > 0.0) return pgd_step_size;
  return 2.5 * gamma / std::max(1, pgd_steps);
}

double rho_margin(double u, double rho) {
  if (!(rho > 0.0)) throw std::domain_error("rho must be > 0");
  return std::clamp(1.0 - u / rho, 0.0, 1.0);
}

double rho_margin_slope(double u, double rho) {
  if (!(rho > 0.0)) throw std::domain_error("rho must be > 0");
  if (u == 0.0 || u == rho) return -0.5 / rho;
  if (u > 0.0 && u < rho) return -1.0 / rho;
  return 0.0;
}

double rho_margin_comp_loss(std::span<const double> scores, std::size_t y, Tau tau, double rho) {
  check_scores(scores);
  check_label(scores, y);
  double u = 0.0;
  for (std::size_t j = 0; j < scores.size(); ++j) {
    if (j != y) u += rho_margin(scores[y] - scores[j], rho);
  }
  return phi_tau(u, tau);
}

AttackResult attack_comp_rho(const DifferentiableModel& model, std::span<const double> x,
                             std::size_t y, Tau tau, const AdvParams& adv,
                             const PerturbationBall& ball) {
  check_ball_input(model, x, y);
  const double rho = adv.rho;
  AscentObjective f = [&](std::span<const double> xp, std::vector<double>& g) {
    const std::vector<double> s = model.forward(xp);
    double u = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (j != y) u += rho_margin(s[y] - s[j], rho);
    }
    const double dphi = phi_tau_deriv(u, tau);
    std::vector<double> up(s.size(), 0.0);
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (j == y) continue;
      const double sl = dphi * rho_margin_slope(s[y] - s[j], rho);
      up[y] += sl;
      up[j] -= sl;
    }
    g = model.input_vjp(xp, up);
    return phi_tau(u, tau);
  };
  return pgd_ascent(f, margin_objective(model, y), x, ball, adv);
}

double adv_comp_rho_loss(const DifferentiableModel& model, std::span<const double> x,
                         std::size_t y, Tau tau, const AdvParams& adv,
                         const PerturbationBall& ball) {
  return attack_comp_rho(model, x, y, tau, adv, ball).value;
}

AttackResult attack_deviation(const DifferentiableModel& model, std::span<const double> x,
                              std::size_t y, const AdvParams& adv, const PerturbationBall& ball) {
  check_ball_input(model, x, y);
  const std::vector<double> s0 = model.forward(x);
  AscentObjective f = [&](std::span<const double> xp, std::vector<double>& g) {
    const std::vector<double> s = model.forward(xp);
    std::vector<double> up(s.size(), 0.0);
    double sq = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (j == y) continue;
      const double dev = (s[y] - s[j]) - (s0[y] - s0[j]);
      sq += dev * dev;
      up[y] += 2.0 * dev;
      up[j] -= 2.0 * dev;
    }
    g = model.input_vjp(xp, up);
    return std::sqrt(sq);
  };
  return pgd_ascent(f, margin_objective(model, y), x, ball, adv);
}

double smooth_adv_comp_loss(const DifferentiableModel& model, std::span<const double> x,
                            std::size_t y, Tau tau, const AdvParams& adv,
                            const PerturbationBall& ball) {
  adv.validate(model.num_labels());
  std::vector<double> s = model.forward(x);
  for (double& v : s) v /= adv.rho;
  const double base = comp_sum_loss(s, y, tau);
  if (ball.gamma == 0.0) return base;
  return base + adv.nu * attack_deviation(model, x, y, adv, ball).value;
}

AttackResult attack_margin(const DifferentiableModel& model, std::span<const double> x,
                           std::size_t y, const PerturbationBall& ball, const AdvParams& attack) {
  check_ball_input(model, x, y);
  AscentObjective f = margin_objective(model, y);
  return pgd_ascent(f, f, x, ball, attack);
}

int adv_zero_one(const DifferentiableModel& model, std::span<const double> x, std::size_t y,
                 const PerturbationBall& ball, const AdvParams& attack) {
  check_ball_input(model, x, y);
  if (predicted_label(model.forward(x)) != y) return 1;
  bool hit = false;
  AscentObjective base = margin_objective(model, y);
  AscentObjective f = [&](std::span<const double> xp, std::vector<double>& g) {
    const double v = base(xp, g);
    if (!hit && predicted_label(model.forward(xp)) != y) hit = true;
    return v;
  };
  pgd_ascent(f, f, x, ball, attack);
  return hit ? 1 : 0;
}

namespace {

void require_linear_1d(const DifferentiableModel& model) {
  if (model.kind() != DifferentiableModel::Kind::Linear || model.input_dim() != 1) {
    throw std::invalid_argument("exact oracle needs a linear model on one-dimensional inputs");
  }
}

std::vector<double> scores_1d(const DifferentiableModel& model, double xp) {
  std::vector<double> s(model.num_labels());
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = model.weight(k, 0) * xp + model.bias(k);
  return s;
}

}  // namespace

int exact_adv_zero_one_1d(const DifferentiableModel& model, double x, std::size_t y, double gamma) {
  require_linear_1d(model);
  const std::size_t n = model.num_labels();
  std::vector<double> cand{x - gamma, x, x + gamma};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dw = model.weight(i, 0) - model.weight(j, 0);
      if (dw == 0.0) continue;
      const double t = -(model.bias(i) - model.bias(j)) / dw;
      if (t >= x - gamma && t <= x + gamma) cand.push_back(t);
    }
  }
  for (double t : cand) {
    if (predicted_label(scores_1d(model, t)) != y) return 1;
  }
  return 0;
}

double exact_adv_comp_rho_1d(const DifferentiableModel& model, double x, std::size_t y, Tau tau,
                             double rho, double gamma) {
  require_linear_1d(model);
  const std::size_t n = model.num_labels();
  std::vector<double> cand{x - gamma, x, x + gamma};
  for (std::size_t j = 0; j < n; ++j) {
    if (j == y) continue;
    const double a = model.weight(y, 0) - model.weight(j, 0);
    const double c = model.bias(y) - model.bias(j);
    if (a == 0.0) continue;
    for (double level : {0.0, rho}) {
      const double t = (level - c) / a;
      if (t >= x - gamma && t <= x + gamma) cand.push_back(t);
    }
  }
  double best = 0.0;
  for (double t : cand) best = std::max(best, rho_margin_comp_loss(scores_1d(model, t), y, tau, rho));
  return best;
}

double exact_deviation_sup_1d(const DifferentiableModel& model, std::size_t y, double gamma) {
  require_linear_1d(model);
  double sq = 0.0;
  for (std::size_t j = 0; j < model.num_labels(); ++j) {
    if (j == y) continue;
    const double a = model.weight(y, 0) - model.weight(j, 0);
    sq += a * a;
  }
  return gamma * std::sqrt(sq);
}

namespace {

// Every pairwise gap >= rho with the center's ordering, on ball samples.
bool ordering_holds(const std::function<std::vector<double>(std::span<const double>)>& scores,
                    std::span<const double> x, double rho, const PerturbationBall& ball) {
  const std::vector<double> s0 = scores(x);
  std::vector<std::size_t> order(s0.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s0[a] < s0[b]; });
  auto ok = [&](std::span<const double> xp) {
    const std::vector<double> s = scores(xp);
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
      if (s[order[k + 1]] - s[order[k]] < rho * (1.0 - 1e-12)) return false;
    }
    return true;
  };
  if (!ok(x)) return false;
  std::mt19937_64 rng(0xba11);
  for (int i = 0; i < 64; ++i) {
    if (!ok(random_point_in_ball(x, ball, rng))) return false;
  }
  const std::size_t d = x.size();
  std::vector<double> xp(x.begin(), x.end());
  if (ball.norm == PNorm::LInf && d <= 10) {
    for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
      for (std::size_t i = 0; i < d; ++i) xp[i] = x[i] + ((mask >> i) & 1u ? ball.gamma : -ball.gamma);
      if (!ok(xp)) return false;
    }
  } else {
    for (std::size_t i = 0; i < d; ++i) {
      for (double sign : {-1.0, 1.0}) {
        std::copy(x.begin(), x.end(), xp.begin());
        xp[i] += sign * ball.gamma;
        if (!ok(xp)) return false;
      }
    }
  }
  return true;
}

}  // namespace

std::vector<LocalConsistency> check_local_rho_consistency(
    const HypothesisSpec& spec, const std::vector<std::vector<double>>& points, double rho,
    const PerturbationBall& ball) {
  if (!(rho > 0.0)) throw std::domain_error("rho must be > 0");
  const std::size_t n = spec.n;
  const double half = static_cast<double>(n - 1) * rho / 2.0;
  std::vector<double> stairs(n);
  for (std::size_t k = 0; k < n; ++k) stairs[k] = -half + static_cast<double>(k) * rho;

  std::vector<LocalConsistency> out;
  for (const auto& x : points) {
    LocalConsistency r{false, "none", {}, {}};
    if (spec.kind == HypothesisSpec::Kind::ScoreBox) {
      double room = std::numeric_limits<double>::infinity();
      for (std::size_t y = 0; y < n; ++y) {
        if (!spec.is_complete()) room = std::min(room, spec.upper(y));
      }
      if (half <= room) {
        r = {true, "staircase", stairs, {}};
      } else {
        r.reason = "n levels rho apart need half-width " + std::to_string(half) +
                   " but the box allows " + std::to_string(room);
      }
      out.push_back(std::move(r));
      continue;
    }
    if (x.size() != spec.feature_dim) throw std::invalid_argument("point dimension mismatch");
    const std::size_t d = spec.feature_dim;
    const double bound = spec.weight_bound;
    std::vector<double> params(spec.num_params(), 0.0);
    if (spec.bias && half <= bound) {
      for (std::size_t k = 0; k < n; ++k) params[n * d + k] = stairs[k];
      r.witness_kind = "constant";
    } else if (d > 0) {
      // Scores k * c * x'_a along the coordinate with the largest |x_a|.
      std::size_t a = 0;
      for (std::size_t i = 1; i < d; ++i) {
        if (std::abs(x[i]) > std::abs(x[a])) a = i;
      }
      std::vector<double> axis(d, 0.0);
      axis[a] = x[a] >= 0.0 ? 1.0 : -1.0;
      // Exact minimum of <axis, x'> over the ball.
      const double lowest = std::abs(x[a]) - ball.gamma * dual_norm_of(axis, ball.norm);
      if (lowest > 0.0) {
        const double c = rho / lowest;
        if (half / rho * c <= bound) {
          for (std::size_t k = 0; k < n; ++k) params[k * d + a] = axis[a] * c * (stairs[k] / rho);
          r.witness_kind = "axis";
        } else {
          r.reason = "axis witness needs weights " + std::to_string(half / rho * c) +
                     " above the bound " + std::to_string(bound);
        }
      } else {
        r.reason = "ball reaches the hyperplane through the origin on every axis";
      }
    } else {
      r.reason = "constant witness needs half-width " + std::to_string(half) +
                 " above the bound " + std::to_string(bound);
    }
    if (r.witness_kind != "none") {
      auto scores = [&](std::span<const double> xp) { return linear_scores(spec, params, xp); };
      if (ordering_holds(scores, x, rho, ball)) {
        r.pass = true;
        r.witness = params;
      } else {
        r.witness_kind = "none";
        r.reason = "witness ordering broke on the ball sample";
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

struct TwoLabelValues {
  double zero_one;
  double surrogate;
};

// Conditional risks of the difference g(x') = dw x' + db = h(x', 0) - h(x', 1)
// with exact sups over [x - gamma, x + gamma]. Label 1 wins ties.
TwoLabelValues two_label_risks(double dw, double db, double x, const CondDist& p, Tau tau,
                               double rho, double gamma) {
  const double g = dw * x + db;
  const double lo = g - gamma * std::abs(dw);
  const double hi = g + gamma * std::abs(dw);
  const double miss0 = lo <= 0.0 ? 1.0 : 0.0;
  const double miss1 = hi > 0.0 ? 1.0 : 0.0;
  const double loss0 = phi_tau(rho_margin(lo, rho), tau);
  const double loss1 = phi_tau(rho_margin(-hi, rho), tau);
  return {p[0] * miss0 + p[1] * miss1, p[0] * loss0 + p[1] * loss1};
}

}  // namespace

AdvBoundReport verify_adv_bound(const FiniteDistribution& dist, const HypothesisSpec& spec,
                                const DifferentiableModel& h, Tau tau, const AdvParams& adv,
                                const PerturbationBall& ball, int grid) {
  if (dist.num_labels() != 2 || spec.n != 2) {
    throw std::invalid_argument("verify_adv_bound: supports two labels");
  }
  if (spec.kind != HypothesisSpec::Kind::Linear || spec.feature_dim != 1 || !spec.bias) {
    throw std::invalid_argument("verify_adv_bound: needs a linear set with bias on 1-D inputs");
  }
  if (dist.feature_dim() != 1) throw std::invalid_argument("verify_adv_bound: inputs must be 1-D");
  require_linear_1d(h);
  for (double v : h.parameters()) {
    if (std::abs(v) > spec.weight_bound * (1.0 + 1e-12)) {
      throw std::invalid_argument("verify_adv_bound: model lies outside the hypothesis set");
    }
  }
  adv.validate(2);
  if (grid < 3) throw std::invalid_argument("verify_adv_bound: grid must be >= 3");

  std::vector<std::vector<double>> inputs;
  for (const auto& pt : dist.points()) inputs.push_back(pt.features);
  const auto consistency = check_local_rho_consistency(spec, inputs, adv.rho, ball);
  for (std::size_t i = 0; i < consistency.size(); ++i) {
    if (!consistency[i].pass) {
      throw std::invalid_argument("hypothesis set is not locally rho-consistent at point " +
                                  std::to_string(i) + ": " + consistency[i].reason);
    }
  }

  const double gamma = ball.gamma;
  const double mult = phi_tau(1.0, tau);
  const double span = 2.0 * spec.weight_bound;
  const std::size_t k = dist.size();

  std::vector<double> star01(k, std::numeric_limits<double>::infinity());
  std::vector<double> star_s(k, std::numeric_limits<double>::infinity());
  double joint01 = std::numeric_limits<double>::infinity();
  double joint_s = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid; ++i) {
    const double dw = -span + 2.0 * span * i / (grid - 1);
    for (int j = 0; j < grid; ++j) {
      const double db = -span + 2.0 * span * j / (grid - 1);
      double r01 = 0.0;
      double rs = 0.0;
      for (std::size_t q = 0; q < k; ++q) {
        const auto& pt = dist[q];
        const TwoLabelValues v = two_label_risks(dw, db, pt.features[0], pt.cond, tau, adv.rho, gamma);
        star01[q] = std::min(star01[q], v.zero_one);
        star_s[q] = std::min(star_s[q], v.surrogate);
        r01 += pt.weight * v.zero_one;
        rs += pt.weight * v.surrogate;
      }
      joint01 = std::min(joint01, r01);
      joint_s = std::min(joint_s, rs);
    }
  }

  AdvBoundReport out{};
  BoundReport& rep = out.bound;
  rep.tau = tau.value();
  rep.n = 2;
  double surrogate_gap = 0.0;
  double smooth_gap = 0.0;
  for (std::size_t q = 0; q < k; ++q) {
    const auto& pt = dist[q];
    const double x = pt.features[0];
    double c01 = 0.0;
    double cs = 0.0;
    double csmooth = 0.0;
    std::vector<double> scaled = scores_1d(h, x);
    for (double& v : scaled) v /= adv.rho;
    for (std::size_t y = 0; y < 2; ++y) {
      if (pt.cond[y] == 0.0) continue;
      c01 += pt.cond[y] * exact_adv_zero_one_1d(h, x, y, gamma);
      cs += pt.cond[y] * exact_adv_comp_rho_1d(h, x, y, tau, adv.rho, gamma);
      csmooth += pt.cond[y] * (comp_sum_loss(scaled, y, tau) +
                               adv.nu * exact_deviation_sup_1d(h, y, gamma));
    }
    PointDiagnostic d{};
    d.weight = pt.weight;
    d.y_max = pt.cond.mode();
    d.predicted = predicted_label(scores_1d(h, x));
    d.zero_one_gap = c01 - star01[q];
    d.surrogate_gap = cs - star_s[q];
    rep.points.push_back(d);
    rep.lhs += pt.weight * d.zero_one_gap;
    surrogate_gap += pt.weight * d.surrogate_gap;
    smooth_gap += pt.weight * (csmooth - star_s[q]);
    out.cond_star_zero_one += pt.weight * star01[q];
    out.cond_star_surrogate += pt.weight * star_s[q];
    out.analytic_star_zero_one += pt.weight * (1.0 - pt.cond.max_prob());
    out.analytic_star_surrogate +=
        pt.weight * std::min(pt.cond[0], pt.cond[1]) * mult;
  }
  rep.gap01 = joint01 - out.cond_star_zero_one;
  rep.gap_surrogate = joint_s - out.cond_star_surrogate;
  // R(h) - R* + M = E[C(h) - C*] on both sides.
  rep.excess01 = rep.lhs - rep.gap01;
  rep.excess_surrogate = surrogate_gap - rep.gap_surrogate;
  rep.rhs = mult * surrogate_gap;
  rep.slack = rep.rhs - rep.lhs;
  out.multiplier = mult;
  out.rhs_smooth = mult * smooth_gap;
  out.rhs_reciprocal = surrogate_gap / mult;
  out.slack_reciprocal = out.rhs_reciprocal - rep.lhs;
  if (out.cond_star_zero_one > out.analytic_star_zero_one + 1e-12 ||
      out.cond_star_surrogate > out.analytic_star_surrogate + 1e-12) {
    rep.flags |= kFlagNotConverged;
  }
  if (rep.slack < -1e-6) rep.flags |= kFlagViolation;
  return out;
}

}  // namespace compsum
