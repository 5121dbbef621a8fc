#include "compsum/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>

#include "compsum/csv.hpp"
#include "compsum/optimize.hpp"

namespace compsum {

namespace {

constexpr int kMuGrid = 512;

// Phi^tau(1/x - 1) for x in (0, 1].
double phi_of_inverse(double x, Tau tau) {
  if (x <= 0.0) return phi_tau_from_log1p(std::numeric_limits<double>::max(), tau);
  return phi_tau_from_log1p(-std::log(std::min(x, 1.0)), tau);
}

double log_pair_power(double p1, double p2, double r) {
  // log(p1^r + p2^r) skipping zeros.
  std::vector<double> logs;
  if (p1 > 0.0) logs.push_back(r * std::log(p1));
  if (p2 > 0.0) logs.push_back(r * std::log(p2));
  return log_sum_exp(logs);
}

double xlog(double p, double ratio) { return p > 0.0 ? p * std::log(ratio) : 0.0; }

}  // namespace

std::string flags_to_string(unsigned flags) {
  static const std::pair<unsigned, const char*> names[] = {
      {kFlagPreconditionUnmet, "precondition_unmet"},
      {kFlagBoxApprox, "box_approx"},
      {kFlagVacuous, "vacuous"},
      {kFlagOutsideTightRange, "outside_tight_range"},
      {kFlagNotConverged, "not_converged"},
      {kFlagViolation, "violation"},
      {kFlagSmoothed, "smoothed"},
  };
  std::string out;
  for (const auto& [bit, name] : names) {
    if (flags & bit) {
      if (!out.empty()) out += '|';
      out += name;
    }
  }
  return out.empty() ? "none" : out;
}

bool BoundReport::violated(double tol) const {
  if (flags & kFlagPreconditionUnmet) return false;
  return slack < -tol;
}

void write_bound_csv_header(std::ostream& out) {
  csv::write_row(out, {"tau", "n", "lhs", "rhs", "slack", "gap01", "gap_surrogate", "flags"});
}

void write_bound_csv_row(std::ostream& out, const BoundReport& r) {
  csv::write_row(out, {csv::format_real(r.tau), std::to_string(r.n), csv::format_real(r.lhs),
                       csv::format_real(r.rhs), csv::format_real(r.slack),
                       csv::format_real(r.gap01), csv::format_real(r.gap_surrogate),
                       flags_to_string(r.flags)});
}

BoundReport verify_h_consistency_bound(const FiniteDistribution& dist,
                                       const ScoreAssignment& assignment,
                                       const HypothesisSpec& spec, Tau tau) {
  if (assignment.scores.size() != dist.size()) {
    throw std::invalid_argument("assignment has " + std::to_string(assignment.scores.size()) +
                                " score vectors for " + std::to_string(dist.size()) + " points");
  }
  if (spec.n != dist.num_labels()) throw std::invalid_argument("spec and distribution disagree on n");
  if (!assignment.respects(spec, 1e-9)) {
    throw std::invalid_argument("assignment violates the hypothesis set bounds");
  }
  BoundReport rep;
  rep.tau = tau.value();
  rep.n = dist.num_labels();
  if (spec.kind != HypothesisSpec::Kind::ScoreBox || !spec.is_symmetric()) {
    rep.flags |= kFlagPreconditionUnmet;
  } else if (!spec.is_complete()) {
    rep.flags |= kFlagBoxApprox;
  }
  const TransformParams params(tau, rep.n);

  double surrogate = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const SupportPoint& pt = dist[i];
    const auto& h = assignment.scores[i];
    const std::size_t y_max = pt.cond.mode();
    const std::size_t pred = predicted_label(h);
    PointDiagnostic d{};
    d.weight = pt.weight;
    d.y_max = y_max;
    d.predicted = pred;
    d.zero_one_gap = pt.cond[y_max] - pt.cond[pred];
    d.surrogate_gap = cond_risk(h, pt.cond, tau) - cond_risk_star_closed(pt.cond, tau);
    rep.lhs += pt.weight * d.zero_one_gap;
    surrogate += pt.weight * d.surrogate_gap;
    rep.points.push_back(d);
  }
  // Per-point infima are attained pointwise, so both gaps vanish.
  rep.gap01 = 0.0;
  rep.gap_surrogate = 0.0;
  rep.excess01 = rep.lhs - rep.gap01;
  rep.excess_surrogate = surrogate - rep.gap_surrogate;
  const double arg = std::max(0.0, rep.excess_surrogate + rep.gap_surrogate);
  try {
    rep.rhs = gamma_tau(arg, params);
  } catch (const GammaRangeError&) {
    rep.rhs = 1.0;
    rep.flags |= kFlagVacuous;
  }
  rep.slack = rep.rhs - rep.lhs;
  if (rep.violated(1e-9)) rep.flags |= kFlagViolation;
  return rep;
}

TightnessInstance build_tightness_instance(double beta, Tau tau, std::size_t n,
                                           double floor_lambda) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::domain_error("beta must lie in [0, 1]");
  if (n < 2) throw std::invalid_argument("n must be >= 2");
  std::vector<double> p(n, 0.0);
  p[0] = (1.0 + beta) / 2.0;
  p[1] = (1.0 - beta) / 2.0;
  std::vector<double> h(n, -floor_lambda);
  h[0] = 0.0;
  h[1] = 0.0;
  FiniteDistribution dist({SupportPoint{1.0, CondDist(std::move(p)), {}}});
  const bool proven = tau.value() <= 1.0 || tau.near_one();
  return TightnessInstance{beta, tau, std::move(dist), ScoreAssignment{{std::move(h)}}, proven};
}

TightnessResult evaluate_tightness(const TightnessInstance& inst) {
  const std::size_t n = inst.dist.num_labels();
  const BoundReport rep = verify_h_consistency_bound(
      inst.dist, inst.witness, HypothesisSpec::complete(n), inst.tau);
  TightnessResult r{};
  r.zero_one_side = rep.lhs;
  r.surrogate_side = rep.excess_surrogate + rep.gap_surrogate;
  r.transform_value = t_tau(inst.beta, TransformParams(inst.tau, n));
  r.flags = rep.flags;
  if (!inst.in_proven_range) r.flags |= kFlagOutsideTightRange;
  return r;
}

HBarMuFamily::HBarMuFamily(std::vector<double> base, std::size_t y_max)
    : base_(std::move(base)), y_max_(y_max) {
  check_scores(base_);
  check_label(base_, y_max_);
  predicted_ = predicted_label(base_);
  shift_ = *std::max_element(base_.begin(), base_.end());
  a_ = std::exp(base_[y_max_] - shift_);
  b_ = std::exp(base_[predicted_] - shift_);
}

double HBarMuFamily::mu_lower() const noexcept { return -a_; }
double HBarMuFamily::mu_upper() const noexcept { return b_; }

std::vector<double> HBarMuFamily::at(double mu) const {
  if (!(mu > mu_lower() && mu < mu_upper())) {
    throw std::domain_error("mu = " + std::to_string(mu) + " outside the admissible interval (" +
                            std::to_string(mu_lower()) + ", " + std::to_string(mu_upper()) + ")");
  }
  std::vector<double> out = base_;
  if (predicted_ == y_max_) {
    // The two swapped entries coincide: a + mu and a - mu cannot both hold,
    // the family reduces to the identity.
    return out;
  }
  out[predicted_] = shift_ + std::log(a_ + mu);
  out[y_max_] = shift_ + std::log(b_ - mu);
  return out;
}

std::vector<double> hbar_mu_scores(std::span<const double> scores, std::size_t y_max, double mu) {
  return HBarMuFamily(std::vector<double>(scores.begin(), scores.end()), y_max).at(mu);
}

double lemma_sup_closed_normalized(double a, double b, double p1, double p2, Tau tau) {
  const double t = tau.value();
  const double c = a + b;
  if (tau.near_one()) {
    const double s = p1 + p2;
    if (s == 0.0) return 0.0;
    return xlog(p1, c * p1 / (a * s)) + xlog(p2, c * p2 / (b * s));
  }
  auto term = [&](double p, double x) { return p > 0.0 ? p * std::pow(x, t - 1.0) : 0.0; };
  if (tau.near_two() || t > 2.0) {
    return (std::max(p1, p2) * std::pow(c, t - 1.0) - term(p1, a) - term(p2, b)) / (t - 1.0);
  }
  const double r = 1.0 / (2.0 - t);
  const double mixed = std::exp((t - 1.0) * std::log(c) + (2.0 - t) * log_pair_power(p1, p2, r));
  return (term(p1, a) + term(p2, b) - mixed) / (1.0 - t);
}

double lemma_sup_numeric_normalized(double a, double b, double p1, double p2, Tau tau) {
  const double c = a + b;
  const double base = p1 * phi_of_inverse(a, tau) + p2 * phi_of_inverse(b, tau);
  // u is the new normalized mass of y_max, c - u the mass of the prediction.
  auto gain = [&](double u) {
    return base - p1 * phi_of_inverse(u, tau) - p2 * phi_of_inverse(c - u, tau);
  };
  const double eps = 1e-12 * c;
  const double lo = eps;
  const double hi = c - eps;
  double best = -std::numeric_limits<double>::infinity();
  int best_k = 0;
  for (int k = 0; k <= kMuGrid; ++k) {
    const double u = lo + (hi - lo) * k / kMuGrid;
    const double v = gain(u);
    if (v > best) {
      best = v;
      best_k = k;
    }
  }
  const double step = (hi - lo) / kMuGrid;
  const double left = std::max(lo, lo + (best_k - 1) * step);
  const double right = std::min(hi, lo + (best_k + 1) * step);
  const double refined = golden_section_max(gain, left, right, 1e-10 * c);
  return std::max(best, refined);
}

double lemma_sup_closed(std::span<const double> scores, const CondDist& p, Tau tau) {
  check_scores(scores);
  if (scores.size() != p.size()) throw std::invalid_argument("dimension mismatch");
  const std::size_t y_max = p.mode();
  const std::size_t pred = predicted_label(scores);
  if (y_max == pred) return 0.0;
  const std::vector<double> s = softmax(scores);
  return lemma_sup_closed_normalized(s[y_max], s[pred], p[y_max], p[pred], tau);
}

double lemma_sup_numeric(std::span<const double> scores, const CondDist& p, Tau tau) {
  check_scores(scores);
  if (scores.size() != p.size()) throw std::invalid_argument("dimension mismatch");
  const std::size_t y_max = p.mode();
  const std::size_t pred = predicted_label(scores);
  if (y_max == pred) return 0.0;
  const std::vector<double> s = softmax(scores);
  return lemma_sup_numeric_normalized(s[y_max], s[pred], p[y_max], p[pred], tau);
}

double lemma_inf_closed(const CondDist& p, Tau tau, std::size_t predicted) {
  if (predicted >= p.size()) throw std::invalid_argument("predicted label out of range");
  const std::size_t y_max = p.mode();
  if (predicted == y_max) return 0.0;
  const double p1 = p[y_max];
  const double p2 = p[predicted];
  const double t = tau.value();
  const double n_pow = std::pow(static_cast<double>(p.size()), t - 1.0);
  if (tau.near_one()) {
    const double s = p1 + p2;
    return xlog(p1, 2.0 * p1 / s) + xlog(p2, 2.0 * p2 / s);
  }
  if (tau.near_two() || t > 2.0) return (p1 - p2) / ((t - 1.0) * n_pow);
  const double r = 1.0 / (2.0 - t);
  const double mean_pow =
      std::exp((2.0 - t) * (log_pair_power(p1, p2, r) - std::numbers::ln2));
  if (t < 1.0) return std::pow(2.0, 2.0 - t) / (1.0 - t) * ((p1 + p2) / 2.0 - mean_pow);
  return 2.0 / ((t - 1.0) * n_pow) * (mean_pow - (p1 + p2) / 2.0);
}

LemmaInfCheck verify_lemma_inf(const CondDist& p, Tau tau, std::size_t predicted, double tol) {
  const std::size_t n = p.size();
  const std::size_t y_max = p.mode();
  LemmaInfCheck out{};
  out.closed = lemma_inf_closed(p, tau, predicted);
  out.alpha = p[y_max] + p[predicted];
  out.beta = p[y_max] - p[predicted];
  if (predicted == y_max) {
    out.alpha = p[y_max];
    out.beta = 0.0;
  }
  out.psi = psi_tau(std::min(1.0, out.alpha), std::max(0.0, out.beta), TransformParams(tau, n));
  out.equality_expected = tau.value() <= 2.0 || tau.near_two();
  if (predicted == y_max) {
    out.brute = 0.0;
    out.pass = std::abs(out.closed) <= tol;
    return out;
  }
  const double p1 = p[y_max];
  const double p2 = p[predicted];
  const double r_max = static_cast<double>(n - 2);
  // Unnormalized masses: prediction 1, y_max a in (0, 1], the other labels
  // share R in [0, n - 2] with none above 1.
  auto objective = [&](double a, double r) {
    const double s = 1.0 + a + r;
    return lemma_sup_numeric_normalized(a / s, 1.0 / s, p1, p2, tau);
  };
  const int grid_a = 40;
  const int grid_r = n > 2 ? 16 : 0;
  double best = std::numeric_limits<double>::infinity();
  double best_a = 1.0;
  double best_r = 0.0;
  for (int i = 0; i <= grid_a; ++i) {
    // Geometric spacing toward a -> 0, ending exactly at a = 1.
    const double a = std::pow(1e-6, 1.0 - static_cast<double>(i) / grid_a);
    for (int j = 0; j <= grid_r; ++j) {
      const double r = grid_r ? r_max * j / grid_r : 0.0;
      const double v = objective(a, r);
      if (v < best) {
        best = v;
        best_a = a;
        best_r = r;
      }
    }
  }
  // Compass search from the best grid node.
  double step_a = 0.25;
  double step_r = std::max(0.25, r_max / 4.0);
  while (step_a > 1e-10) {
    bool moved = false;
    const double cand[4][2] = {{best_a + step_a, best_r},
                               {best_a - step_a, best_r},
                               {best_a, best_r + step_r},
                               {best_a, best_r - step_r}};
    for (const auto& c : cand) {
      const double a = std::clamp(c[0], 1e-12, 1.0);
      const double r = std::clamp(c[1], 0.0, r_max);
      const double v = objective(a, r);
      if (v < best) {
        best = v;
        best_a = a;
        best_r = r;
        moved = true;
      }
    }
    if (!moved) {
      step_a *= 0.5;
      step_r *= 0.5;
    }
  }
  out.brute = best;
  const bool psi_ok = std::abs(out.closed - out.psi) <= tol;
  if (out.equality_expected) {
    out.pass = std::abs(out.closed - out.brute) <= tol && psi_ok;
  } else {
    out.pass = out.closed <= out.brute + tol && psi_ok;
  }
  return out;
}

namespace {

// max over the score box of sum_y c_y * loss(h, y).
double max_signed_loss(std::span<const double> c, Tau tau, std::span<const double> lo,
                       std::span<const double> hi, const BoxMinimizerOptions& opts) {
  const std::size_t n = c.size();
  auto value = [&](std::span<const double> h, std::span<double> g) {
    double total = 0.0;
    std::vector<double> gy(n);
    if (!g.empty()) std::fill(g.begin(), g.end(), 0.0);
    for (std::size_t y = 0; y < n; ++y) {
      if (c[y] == 0.0) continue;
      total += c[y] * comp_sum_loss_grad(h, y, tau, gy);
      if (!g.empty()) {
        for (std::size_t j = 0; j < n; ++j) g[j] -= c[y] * gy[j];
      }
    }
    return -total;
  };
  std::vector<std::vector<double>> starts;
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_corner;
  if (n <= 12) {
    std::vector<double> h(n);
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
      for (std::size_t j = 0; j < n; ++j) h[j] = (mask >> j) & 1u ? hi[j] : lo[j];
      const double v = value(h, {});
      if (v < best) {
        best = v;
        best_corner = h;
      }
    }
    starts.push_back(best_corner);
  }
  starts.emplace_back(n, 0.0);
  BoxMinimizerOptions o = opts;
  o.random_starts = 2;
  BoxMinimum m = minimize_on_box(value, lo, hi, starts, o);
  return -std::min(best, m.value);
}

}  // namespace

LearningBoundResult learning_bound(const FiniteDistribution& dist, const HypothesisSpec& spec,
                                   Tau tau, std::size_t m, double delta, std::uint64_t seed,
                                   const LearningBoundOptions& opts) {
  if (spec.kind != HypothesisSpec::Kind::ScoreBox) {
    throw std::invalid_argument("learning_bound: needs a score box hypothesis set");
  }
  if (m == 0) throw std::invalid_argument("learning_bound: m must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw std::domain_error("learning_bound: delta must lie in (0, 1)");
  const std::size_t n = dist.num_labels();
  const std::size_t k = dist.size();
  const double lambda = spec.is_complete() ? kCompleteBox : spec.lambda;
  std::vector<double> lo(n), hi(n);
  for (std::size_t y = 0; y < n; ++y) {
    hi[y] = spec.is_complete() ? kCompleteBox : spec.upper(y);
    lo[y] = -hi[y];
  }

  std::mt19937_64 rng(seed);
  std::vector<double> weights;
  for (const auto& pt : dist.points()) weights.push_back(pt.weight);
  std::discrete_distribution<std::size_t> pick_point(weights.begin(), weights.end());
  std::vector<std::discrete_distribution<std::size_t>> pick_label;
  for (const auto& pt : dist.points()) {
    pick_label.emplace_back(pt.cond.probs().begin(), pt.cond.probs().end());
  }
  std::vector<std::size_t> xs(m), ys(m);
  std::vector<std::vector<double>> counts(k, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    xs[i] = pick_point(rng);
    ys[i] = pick_label[xs[i]](rng);
    counts[xs[i]][ys[i]] += 1.0;
  }

  LearningBoundResult out{};
  out.m = m;
  const HypothesisSpec box = spec.is_complete() ? HypothesisSpec::score_box(n, kCompleteBox) : spec;
  double emp = 0.0;
  for (std::size_t x = 0; x < k; ++x) {
    double total = 0.0;
    for (double c : counts[x]) total += c;
    std::vector<double> h(n, 0.0);
    if (total > 0.0) {
      std::vector<double> q(n);
      for (std::size_t y = 0; y < n; ++y) q[y] = counts[x][y] / total;
      const CondDist phat(std::move(q));
      BruteForceResult r = cond_risk_star_brute(phat, tau, box, opts.optimizer);
      h = r.argmin;
      emp += total / static_cast<double>(m) * r.value;
    }
    const SupportPoint& pt = dist[x];
    out.realized_excess01 += pt.weight * (pt.cond.max_prob() - pt.cond[predicted_label(h)]);
  }
  out.empirical_surrogate_risk = emp;

  // Empirical Rademacher complexity of the loss class on this sample. Scores
  // are free per support point, so the supremum splits across points.
  std::vector<double> draws;
  std::vector<std::vector<double>> coeff(k, std::vector<double>(n));
  for (int d = 0; d < opts.rademacher_draws; ++d) {
    for (auto& row : coeff) std::fill(row.begin(), row.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const double sigma = (rng() & 1u) ? 1.0 : -1.0;
      coeff[xs[i]][ys[i]] += sigma;
    }
    double sup = 0.0;
    for (std::size_t x = 0; x < k; ++x) {
      bool any = false;
      for (double c : coeff[x]) any = any || c != 0.0;
      if (any) sup += max_signed_loss(coeff[x], tau, lo, hi, opts.optimizer);
    }
    draws.push_back(sup / static_cast<double>(m));
  }
  double mean = 0.0;
  for (double v : draws) mean += v;
  mean /= static_cast<double>(draws.size());
  double var = 0.0;
  for (double v : draws) var += (v - mean) * (v - mean);
  var /= std::max<double>(1.0, static_cast<double>(draws.size()) - 1.0);
  out.rademacher = mean;
  out.rademacher_stderr = std::sqrt(var / static_cast<double>(draws.size()));

  out.loss_cap = loss_cap(tau, n, lambda);
  out.confidence_term =
      2.0 * out.loss_cap * std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(m)));
  out.gap_surrogate = 0.0;
  out.gap01 = 0.0;
  const double arg = out.gap_surrogate + 4.0 * out.rademacher + out.confidence_term;
  const TransformParams params(tau, n);
  if (!std::isfinite(arg) || arg > t_tau(1.0, params)) {
    out.bound = 1.0;
    out.vacuous = true;
  } else {
    out.bound = gamma_tau(arg, params) - out.gap01;
    out.vacuous = false;
  }
  return out;
}

}  // namespace compsum
