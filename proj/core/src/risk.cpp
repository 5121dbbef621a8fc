#include "compsum/risk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace compsum {

namespace {

constexpr double kSumTol = 1e-12;
constexpr double kSmoothing = 1e-12;

void check_match(std::span<const double> scores, const CondDist& p) {
  if (scores.size() != p.size()) {
    throw std::invalid_argument("dimension mismatch: " + std::to_string(scores.size()) +
                                " scores vs " + std::to_string(p.size()) + " probabilities");
  }
}

double l1_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

}  // namespace

CondDist::CondDist(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.size() < 2) throw std::invalid_argument("CondDist needs n >= 2 labels");
  double s = 0.0;
  for (double v : probs_) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::domain_error("CondDist entries must be finite and nonnegative");
    }
    s += v;
  }
  if (std::abs(s - 1.0) > kSumTol) {
    throw std::domain_error("CondDist entries sum to " + std::to_string(s) + ", expected 1");
  }
}

CondDist CondDist::uniform(std::size_t n) {
  return CondDist(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

CondDist CondDist::onehot(std::size_t n, std::size_t label) {
  if (label >= n) throw std::invalid_argument("onehot label out of range");
  std::vector<double> p(n, 0.0);
  p[label] = 1.0;
  return CondDist(std::move(p));
}

std::size_t CondDist::mode() const { return predicted_label(probs_); }

double CondDist::max_prob() const { return *std::max_element(probs_.begin(), probs_.end()); }

FiniteDistribution::FiniteDistribution(std::vector<SupportPoint> points)
    : points_(std::move(points)), n_(0) {
  if (points_.empty()) throw std::invalid_argument("FiniteDistribution needs a support point");
  n_ = points_.front().cond.size();
  const std::size_t d = points_.front().features.size();
  double s = 0.0;
  for (const auto& pt : points_) {
    if (pt.cond.size() != n_) throw std::invalid_argument("support points disagree on n");
    if (pt.features.size() != d) {
      throw std::invalid_argument("support points disagree on feature dimension");
    }
    if (!(pt.weight >= 0.0) || !std::isfinite(pt.weight)) {
      throw std::domain_error("support weights must be finite and nonnegative");
    }
    s += pt.weight;
  }
  if (std::abs(s - 1.0) > kSumTol) {
    throw std::domain_error("support weights sum to " + std::to_string(s) + ", expected 1");
  }
}

std::size_t FiniteDistribution::feature_dim() const noexcept {
  return points_.front().features.size();
}

HypothesisSpec HypothesisSpec::complete(std::size_t n) {
  if (n < 2) throw std::invalid_argument("HypothesisSpec: n must be >= 2");
  HypothesisSpec s;
  s.n = n;
  return s;
}

HypothesisSpec HypothesisSpec::score_box(std::size_t n, double lambda) {
  if (!(lambda > 0.0)) throw std::domain_error("score box bound must be > 0");
  HypothesisSpec s = complete(n);
  s.lambda = lambda;
  return s;
}

HypothesisSpec HypothesisSpec::label_box(std::vector<double> bounds) {
  HypothesisSpec s = complete(bounds.size());
  for (double b : bounds) {
    if (!(b > 0.0)) throw std::domain_error("label bounds must be > 0");
  }
  s.lambda = *std::max_element(bounds.begin(), bounds.end());
  s.label_bounds = std::move(bounds);
  return s;
}

HypothesisSpec HypothesisSpec::linear(std::size_t n, std::size_t feature_dim,
                                      double weight_bound, bool bias) {
  if (n < 2) throw std::invalid_argument("HypothesisSpec: n must be >= 2");
  if (feature_dim == 0 && !bias) throw std::invalid_argument("linear spec has no parameters");
  if (!(weight_bound > 0.0) || !std::isfinite(weight_bound)) {
    throw std::domain_error("linear weight bound must be finite and > 0");
  }
  HypothesisSpec s;
  s.kind = Kind::Linear;
  s.n = n;
  s.feature_dim = feature_dim;
  s.weight_bound = weight_bound;
  s.bias = bias;
  return s;
}

bool HypothesisSpec::is_complete() const noexcept {
  return kind == Kind::ScoreBox && std::isinf(lambda) && label_bounds.empty();
}

bool HypothesisSpec::is_symmetric() const noexcept {
  if (kind == Kind::Linear) return true;
  for (double b : label_bounds) {
    if (b != label_bounds.front()) return false;
  }
  return true;
}

double HypothesisSpec::lower(std::size_t label) const { return -upper(label); }

double HypothesisSpec::upper(std::size_t label) const {
  if (kind != Kind::ScoreBox) throw std::logic_error("upper(): spec is not a score box");
  if (!label_bounds.empty()) return label_bounds.at(label);
  return lambda;
}

std::size_t HypothesisSpec::num_params() const noexcept {
  return kind == Kind::Linear ? n * feature_dim + (bias ? n : 0) : 0;
}

bool ScoreAssignment::respects(const HypothesisSpec& spec, double tol) const {
  if (spec.kind != HypothesisSpec::Kind::ScoreBox) return true;
  for (const auto& h : scores) {
    if (h.size() != spec.n) return false;
    for (std::size_t y = 0; y < h.size(); ++y) {
      if (std::abs(h[y]) > spec.upper(y) + tol) return false;
    }
  }
  return true;
}

std::vector<double> linear_scores(const HypothesisSpec& spec, std::span<const double> params,
                                  std::span<const double> features) {
  if (spec.kind != HypothesisSpec::Kind::Linear) throw std::logic_error("spec is not linear");
  if (params.size() != spec.num_params()) throw std::invalid_argument("parameter size mismatch");
  if (features.size() != spec.feature_dim) throw std::invalid_argument("feature size mismatch");
  const std::size_t d = spec.feature_dim;
  std::vector<double> h(spec.n, 0.0);
  for (std::size_t y = 0; y < spec.n; ++y) {
    double s = spec.bias ? params[spec.n * d + y] : 0.0;
    for (std::size_t k = 0; k < d; ++k) s += params[y * d + k] * features[k];
    h[y] = s;
  }
  return h;
}

double cond_risk(std::span<const double> scores, const CondDist& p, Tau tau) {
  check_match(scores, p);
  double r = 0.0;
  for (std::size_t y = 0; y < p.size(); ++y) {
    if (p[y] > 0.0) r += p[y] * comp_sum_loss(scores, y, tau);
  }
  return r;
}

double cond_risk_grad(std::span<const double> scores, const CondDist& p, Tau tau,
                      std::span<double> grad) {
  check_match(scores, p);
  std::fill(grad.begin(), grad.end(), 0.0);
  std::vector<double> g(scores.size());
  double r = 0.0;
  for (std::size_t y = 0; y < p.size(); ++y) {
    if (p[y] == 0.0) continue;
    r += p[y] * comp_sum_loss_grad(scores, y, tau, g);
    for (std::size_t j = 0; j < g.size(); ++j) grad[j] += p[y] * g[j];
  }
  return r;
}

double cond_risk_star_closed(const CondDist& p, Tau tau) {
  const double t = tau.value();
  if (tau.near_one()) {
    double h = 0.0;
    for (double v : p.probs()) {
      if (v > 0.0) h -= v * std::log(v);
    }
    return h;
  }
  if (tau.near_two()) return 1.0 - p.max_prob();
  if (t > 2.0) return (1.0 - p.max_prob()) / (t - 1.0);
  const double r = 1.0 / (2.0 - t);
  std::vector<double> logs;
  for (double v : p.probs()) {
    if (v > 0.0) logs.push_back(r * std::log(v));
  }
  const double a = (2.0 - t) * log_sum_exp(logs);
  return std::max(0.0, std::expm1(a) / (1.0 - t));
}

StationaryValue stationary_cond_risk(const CondDist& p, Tau tau) {
  const double t = tau.value();
  if (tau.near_one() || tau.near_two() || t < 2.0) return {cond_risk_star_closed(p, tau), false};
  std::vector<double> q(p.probs().begin(), p.probs().end());
  bool smoothed = false;
  for (double& v : q) {
    if (v == 0.0) {
      v = kSmoothing;
      smoothed = true;
    }
  }
  const double total = std::accumulate(q.begin(), q.end(), 0.0);
  const double r = 1.0 / (2.0 - t);
  std::vector<double> logs;
  for (double v : q) logs.push_back(r * std::log(v / total));
  const double a = (2.0 - t) * log_sum_exp(logs);
  return {std::expm1(a) / (1.0 - t), smoothed};
}

std::vector<double> stationary_scores(const CondDist& p, Tau tau) {
  if (tau.near_two()) throw std::domain_error("stationary_scores: tau = 2 has no interior point");
  const double r = 1.0 / (2.0 - tau.value());
  std::vector<double> h(p.size());
  for (std::size_t y = 0; y < p.size(); ++y) {
    if (!(p[y] > 0.0)) throw std::domain_error("stationary_scores: needs p > 0");
    h[y] = r * std::log(p[y]);
  }
  return h;
}

std::vector<double> cond_risk_grad_from_s(std::span<const double> s_values, const CondDist& p,
                                          Tau tau) {
  const std::size_t n = p.size();
  if (s_values.size() != n) throw std::invalid_argument("S vector size mismatch");
  const double t = tau.value();
  std::vector<double> g(n, 0.0);
  for (std::size_t y = 0; y < n; ++y) {
    double v = p[y] * (1.0 - s_values[y]) / std::pow(s_values[y], t);
    for (std::size_t yp = 0; yp < n; ++yp) {
      if (yp == y) continue;
      v += p[yp] / (std::pow(s_values[yp], t - 1.0) * s_values[y]);
    }
    g[y] = v;
  }
  return g;
}

BruteForceResult cond_risk_star_brute(const CondDist& p, Tau tau, const HypothesisSpec& spec,
                                      const BoxMinimizerOptions& opts) {
  if (spec.kind != HypothesisSpec::Kind::ScoreBox) {
    throw std::invalid_argument("cond_risk_star_brute: needs a score box spec");
  }
  if (spec.n != p.size()) throw std::invalid_argument("cond_risk_star_brute: n mismatch");
  const std::size_t n = p.size();
  std::vector<double> lo(n), hi(n);
  for (std::size_t y = 0; y < n; ++y) {
    hi[y] = spec.is_complete() ? kCompleteBox : spec.upper(y);
    lo[y] = -hi[y];
  }
  Objective f = [&](std::span<const double> h, std::span<double> g) {
    return cond_risk_grad(h, p, tau, g);
  };
  std::vector<std::vector<double>> starts;
  starts.emplace_back(n, 0.0);
  std::vector<double> from_log(n);
  for (std::size_t y = 0; y < n; ++y) {
    from_log[y] = p[y] > 0.0 ? std::clamp(std::log(p[y]), lo[y], hi[y]) : lo[y];
  }
  starts.push_back(from_log);
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> corner(lo);
    corner[k] = hi[k];
    starts.push_back(std::move(corner));
  }
  BoxMinimum m = minimize_on_box(f, lo, hi, starts, opts);
  return {m.value, std::move(m.argmin), m.converged};
}

BruteForceResult pointwise_cond_risk_star(const SupportPoint& point, Tau tau,
                                          const HypothesisSpec& spec,
                                          const BoxMinimizerOptions& opts) {
  if (spec.kind == HypothesisSpec::Kind::ScoreBox) {
    if (spec.is_complete()) return {cond_risk_star_closed(point.cond, tau), {}, true};
    return cond_risk_star_brute(point.cond, tau, spec, opts);
  }
  // Each label has its own weights, so h(x, .) fills the box of half-width
  // B * (|phi(x)|_1 + bias).
  const double reach = spec.weight_bound * (l1_norm(point.features) + (spec.bias ? 1.0 : 0.0));
  if (!(reach > 0.0)) {
    std::vector<double> h(spec.n, 0.0);
    return {cond_risk(h, point.cond, tau), h, true};
  }
  return cond_risk_star_brute(point.cond, tau, HypothesisSpec::score_box(spec.n, reach), opts);
}

double calibration_gap(std::span<const double> scores, const CondDist& p, Tau tau,
                       const HypothesisSpec& spec, const BoxMinimizerOptions& opts) {
  const double c = cond_risk(scores, p, tau);
  const double star = spec.is_complete() ? cond_risk_star_closed(p, tau)
                                         : cond_risk_star_brute(p, tau, spec, opts).value;
  return c - star;
}

double expected_risk(const FiniteDistribution& dist, const ScoreAssignment& h, Tau tau) {
  if (h.scores.size() != dist.size()) throw std::invalid_argument("assignment size mismatch");
  double r = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    r += dist[i].weight * cond_risk(h.scores[i], dist[i].cond, tau);
  }
  return r;
}

GapResult minimizability_gap(const FiniteDistribution& dist, const HypothesisSpec& spec, Tau tau,
                             const BoxMinimizerOptions& opts) {
  if (dist.num_labels() != spec.n) throw std::invalid_argument("minimizability_gap: n mismatch");
  GapResult out{0.0, 0.0, 0.0, true, {}};
  for (const auto& pt : dist.points()) {
    BruteForceResult r = pointwise_cond_risk_star(pt, tau, spec, opts);
    out.expected_pointwise += pt.weight * r.value;
    out.converged = out.converged && r.converged;
    if (spec.kind == HypothesisSpec::Kind::ScoreBox) {
      out.argmin.insert(out.argmin.end(), r.argmin.begin(), r.argmin.end());
    }
  }
  if (spec.kind == HypothesisSpec::Kind::ScoreBox) {
    // Scores are chosen independently per point: the joint infimum decomposes.
    out.best_in_class = out.expected_pointwise;
    out.gap = out.best_in_class - out.expected_pointwise;
    return out;
  }
  if (dist.feature_dim() != spec.feature_dim) {
    throw std::invalid_argument("minimizability_gap: feature dimension mismatch");
  }
  const std::size_t np = spec.num_params();
  const std::size_t d = spec.feature_dim;
  const std::size_t n = spec.n;
  Objective f = [&](std::span<const double> w, std::span<double> g) {
    std::fill(g.begin(), g.end(), 0.0);
    std::vector<double> gh(n);
    double total = 0.0;
    for (const auto& pt : dist.points()) {
      if (pt.weight == 0.0) continue;
      const std::vector<double> h = linear_scores(spec, w, pt.features);
      total += pt.weight * cond_risk_grad(h, pt.cond, tau, gh);
      for (std::size_t y = 0; y < n; ++y) {
        for (std::size_t k = 0; k < d; ++k) g[y * d + k] += pt.weight * gh[y] * pt.features[k];
        if (spec.bias) g[n * d + y] += pt.weight * gh[y];
      }
    }
    return total;
  };
  std::vector<double> lo(np, -spec.weight_bound), hi(np, spec.weight_bound);
  std::vector<std::vector<double>> starts{std::vector<double>(np, 0.0)};
  BoxMinimum m = minimize_on_box(f, lo, hi, starts, opts);
  out.best_in_class = m.value;
  out.converged = out.converged && m.converged;
  out.argmin = std::move(m.argmin);
  out.gap = out.best_in_class - out.expected_pointwise;
  return out;
}

double deterministic_cond_risk_star(std::size_t n, double lambda, Tau tau) {
  if (n < 2) throw std::invalid_argument("n must be >= 2");
  if (!(lambda > 0.0)) throw std::domain_error("lambda must be > 0");
  return phi_tau(std::exp(-2.0 * lambda) * static_cast<double>(n - 1), tau);
}

double gap_upper_bound_deterministic(const HypothesisSpec& spec, Tau tau, double r_star_tau0) {
  if (spec.kind != HypothesisSpec::Kind::ScoreBox || !spec.is_symmetric()) {
    throw std::invalid_argument("gap_upper_bound_deterministic: needs a symmetric score box");
  }
  if (!std::isfinite(r_star_tau0)) throw std::domain_error("best-in-class risk must be finite");
  const double floor_risk =
      std::isinf(spec.lambda) ? 0.0 : std::exp(-2.0 * spec.lambda) * static_cast<double>(spec.n - 1);
  if (r_star_tau0 < floor_risk * (1.0 - 1e-12)) {
    throw std::domain_error("best-in-class risk " + std::to_string(r_star_tau0) +
                            " is below the pointwise floor " + std::to_string(floor_risk));
  }
  return phi_tau(std::max(r_star_tau0, floor_risk), tau) - phi_tau(floor_risk, tau);
}

}  // namespace compsum
