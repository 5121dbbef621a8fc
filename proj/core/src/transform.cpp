#include "compsum/transform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace compsum {

namespace {

enum class Branch { Below1, One, Between, AtLeast2 };

Branch branch_of(Tau tau) {
  if (tau.near_one()) return Branch::One;
  if (tau.near_two() || tau.value() > 2.0) return Branch::AtLeast2;
  return tau.value() < 1.0 ? Branch::Below1 : Branch::Between;
}

void check_beta(double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw std::domain_error("beta must lie in [0, 1], got " + std::to_string(beta));
  }
}

double xlogx_half(double a) {
  // (a/2) * log(a) with 0 log 0 = 0.
  return a > 0.0 ? 0.5 * a * std::log(a) : 0.0;
}

double n_pow(const TransformParams& p) {
  return std::pow(static_cast<double>(p.n), p.tau.value() - 1.0);
}

// A = (2 - tau) * log(((1+beta)^r + (1-beta)^r) / 2), r = 1/(2 - tau).
double log_power_term(double beta, double tau) {
  const double r = 1.0 / (2.0 - tau);
  const double lp = std::log1p(beta);
  if (beta >= 1.0) return (2.0 - tau) * (r * lp - std::numbers::ln2);
  const double lm = std::log1p(-beta);
  return lp + (2.0 - tau) * (std::log1p(std::exp(r * (lm - lp))) - std::numbers::ln2);
}

// ((a^r + b^r) / 2)^(1/r) for a, b >= 0, r > 0.
double power_mean(double a, double b, double r) {
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  if (hi == 0.0) return 0.0;
  const double ratio_r = std::pow(lo / hi, r);
  return hi * std::exp(std::log1p(ratio_r) / r - std::numbers::ln2 / r);
}

}  // namespace

TransformParams::TransformParams(Tau tau_, std::size_t n_) : tau(tau_), n(n_) {
  if (n < 2) throw std::invalid_argument("transform: n must be >= 2");
}

GammaRangeError::GammaRangeError(double t, double attainable_max)
    : std::range_error("gamma_tau: t = " + std::to_string(t) +
                       " exceeds the attainable maximum " + std::to_string(attainable_max)),
      requested_(t),
      attainable_max_(attainable_max) {}

double t_tau(double beta, const TransformParams& p) {
  check_beta(beta);
  const double tau = p.tau.value();
  switch (branch_of(p.tau)) {
    case Branch::One:
      return xlogx_half(1.0 + beta) + xlogx_half(1.0 - beta);
    case Branch::AtLeast2:
      return beta / ((tau - 1.0) * n_pow(p));
    case Branch::Below1:
      return std::pow(2.0, 1.0 - tau) / (1.0 - tau) * (-std::expm1(log_power_term(beta, tau)));
    case Branch::Between:
      return std::expm1(log_power_term(beta, tau)) / ((tau - 1.0) * n_pow(p));
  }
  return 0.0;
}

double gamma_tau(double t, const TransformParams& p) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw std::domain_error("gamma_tau: t must be finite and >= 0");
  }
  const double t_max = t_tau(1.0, p);
  if (t > t_max * (1.0 + 1e-12)) throw GammaRangeError(t, t_max);
  if (branch_of(p.tau) == Branch::AtLeast2) {
    return std::min(1.0, (p.tau.value() - 1.0) * n_pow(p) * t);
  }
  if (t >= t_max) return 1.0;
  if (t == 0.0) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (t_tau(mid, p) < t) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::abs(t_tau(lo, p) - t) <= std::abs(t_tau(hi, p) - t) ? lo : hi;
}

double t_tilde(double beta, const TransformParams& p) {
  check_beta(beta);
  const double tau = p.tau.value();
  if (tau >= 2.0 || p.tau.near_two()) return beta / ((tau - 1.0) * n_pow(p));
  if (tau >= 1.0 || p.tau.near_one()) return beta * beta / (2.0 * n_pow(p));
  return beta * beta / (std::pow(2.0, tau) * (2.0 - tau));
}

double gamma_tilde(double t, const TransformParams& p) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw std::domain_error("gamma_tilde: t must be finite and >= 0");
  }
  const double tau = p.tau.value();
  if (tau >= 2.0 || p.tau.near_two()) return (tau - 1.0) * n_pow(p) * t;
  if (tau >= 1.0 || p.tau.near_one()) return std::sqrt(2.0 * n_pow(p) * t);
  return std::sqrt(std::pow(2.0, tau) * (2.0 - tau) * t);
}

double psi_tau(double alpha, double beta, const TransformParams& p) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::domain_error("psi_tau: alpha outside [0, 1]");
  if (!(beta >= 0.0)) throw std::domain_error("psi_tau: beta must be >= 0");
  if (beta > alpha) {
    if (beta > alpha + 1e-15) throw std::domain_error("psi_tau: beta exceeds alpha");
    beta = alpha;
  }
  const double tau = p.tau.value();
  const double up = alpha + beta;
  const double down = alpha - beta;
  switch (branch_of(p.tau)) {
    case Branch::One: {
      if (alpha == 0.0) return 0.0;
      const double a = up > 0.0 ? 0.5 * up * std::log(up / alpha) : 0.0;
      const double b = down > 0.0 ? 0.5 * down * std::log(down / alpha) : 0.0;
      return a + b;
    }
    case Branch::AtLeast2:
      return beta / ((tau - 1.0) * n_pow(p));
    case Branch::Below1: {
      const double r = 1.0 / (2.0 - tau);
      return std::pow(2.0, 1.0 - tau) / (1.0 - tau) * (alpha - power_mean(up, down, r));
    }
    case Branch::Between: {
      const double r = 1.0 / (2.0 - tau);
      return (power_mean(up, down, r) - alpha) / ((tau - 1.0) * n_pow(p));
    }
  }
  return 0.0;
}

}  // namespace compsum
