#include "compsum/loss.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace compsum {

namespace {

constexpr double kNegativeClamp = 1e-12;

double saturate(double v) {
  if (std::isnan(v)) return v;
  return std::min(v, DBL_MAX);
}

}  // namespace

Tau::Tau(double value) : value_(value) {
  if (!std::isfinite(value) || value < 0.0 || value > kMax) {
    throw std::domain_error("tau must lie in [0, 100], got " + std::to_string(value));
  }
}

bool Tau::near_one() const noexcept { return std::abs(value_ - 1.0) < kBranchWindow; }
bool Tau::near_two() const noexcept { return std::abs(value_ - 2.0) < kBranchWindow; }

double phi_tau_from_log1p(double log1p_u, Tau tau) {
  if (std::isnan(log1p_u)) throw std::domain_error("phi_tau: NaN argument");
  if (log1p_u <= 0.0) return 0.0;
  if (tau.near_one()) return saturate(log1p_u);
  const double a = 1.0 - tau.value();
  return saturate(std::expm1(a * log1p_u) / a);
}

double phi_tau(double u, Tau tau) {
  if (!std::isfinite(u)) throw std::domain_error("phi_tau: non-finite argument");
  if (u < 0.0) {
    if (u > -kNegativeClamp) {
      u = 0.0;
    } else {
      throw std::domain_error("phi_tau: negative argument " + std::to_string(u));
    }
  }
  return phi_tau_from_log1p(std::log1p(u), tau);
}

double phi_tau_deriv(double u, Tau tau) {
  if (!std::isfinite(u)) throw std::domain_error("phi_tau_deriv: non-finite argument");
  if (u < 0.0) {
    if (u > -kNegativeClamp) {
      u = 0.0;
    } else {
      throw std::domain_error("phi_tau_deriv: negative argument " + std::to_string(u));
    }
  }
  return std::exp(-tau.value() * std::log1p(u));
}

double log_sum_exp(std::span<const double> v) {
  if (v.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(v.begin(), v.end());
  if (std::isinf(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

std::vector<double> softmax(std::span<const double> scores) {
  std::vector<double> out(scores.size());
  if (scores.empty()) return out;
  const double m = *std::max_element(scores.begin(), scores.end());
  double s = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(scores[i] - m);
    s += out[i];
  }
  for (double& x : out) x /= s;
  return out;
}

std::size_t predicted_label(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] >= scores[best]) best = i;
  }
  return best;
}

void check_scores(std::span<const double> scores) {
  if (scores.size() < 2) throw std::invalid_argument("score vector needs n >= 2 entries");
  for (double s : scores) {
    if (!std::isfinite(s)) throw std::domain_error("score vector has a non-finite entry");
  }
}

void check_label(std::span<const double> scores, std::size_t label) {
  if (label >= scores.size()) {
    throw std::invalid_argument("label " + std::to_string(label) + " out of range for n = " +
                                std::to_string(scores.size()));
  }
}

double comp_sum_loss(std::span<const double> scores, std::size_t label, Tau tau) {
  check_scores(scores);
  check_label(scores, label);
  // log S with S = sum_j exp(h_j - h_y) >= 1.
  const double log_s = std::max(0.0, log_sum_exp(scores) - scores[label]);
  return phi_tau_from_log1p(log_s, tau);
}

double comp_sum_loss_grad(std::span<const double> scores, std::size_t label, Tau tau,
                          std::span<double> grad) {
  check_scores(scores);
  check_label(scores, label);
  if (grad.size() != scores.size()) throw std::invalid_argument("gradient size mismatch");
  const double lse = log_sum_exp(scores);
  const double log_s = std::max(0.0, lse - scores[label]);
  // d/dh_j Phi(S - 1) = S^(-tau) * dS/dh_j = S^(1-tau) * (softmax_j - [j == y]).
  const double scale = saturate(std::exp((1.0 - tau.value()) * log_s));
  double rest = 0.0;
  for (std::size_t j = 0; j < scores.size(); ++j) {
    if (j == label) continue;
    const double sj = std::exp(scores[j] - lse);
    grad[j] = scale * sj;
    rest += sj;
  }
  grad[label] = -scale * rest;
  return phi_tau_from_log1p(log_s, tau);
}

std::vector<double> comp_sum_grad(std::span<const double> scores, std::size_t label,
                                  Tau tau) {
  std::vector<double> g(scores.size());
  comp_sum_loss_grad(scores, label, tau, g);
  return g;
}

double loss_cap(Tau tau, std::size_t n, std::optional<double> score_bound) {
  if (n < 2) throw std::invalid_argument("loss_cap: n must be >= 2");
  double cap = std::numeric_limits<double>::infinity();
  if (tau.value() > 1.0 && !tau.near_one()) cap = 1.0 / (tau.value() - 1.0);
  if (score_bound) {
    if (!(*score_bound >= 0.0)) throw std::domain_error("loss_cap: score bound must be >= 0");
    // Worst case: every other label 2*lambda above the true one.
    const double log_s = std::log(static_cast<double>(n - 1)) + 2.0 * *score_bound;
    const double log1p_u = log_s > 30.0 ? log_s : std::log1p(std::exp(log_s));
    cap = std::min(cap, phi_tau_from_log1p(log1p_u, tau));
  }
  return cap;
}

}  // namespace compsum
