#pragma once

// Reference implementations written directly from the defining formulas, in
// long double, with no shared code paths with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace oracle {

using ld = long double;

inline ld phi(ld u, ld tau) {
  if (tau == 1.0L) return std::log(1.0L + u);
  return (std::pow(1.0L + u, 1.0L - tau) - 1.0L) / (1.0L - tau);
}

inline ld comp_sum(const std::vector<double>& h, std::size_t y, ld tau) {
  ld u = 0.0L;
  for (std::size_t j = 0; j < h.size(); ++j) {
    if (j != y) u += std::exp(static_cast<ld>(h[j]) - static_cast<ld>(h[y]));
  }
  return phi(u, tau);
}

inline ld cond_risk(const std::vector<double>& h, const std::vector<double>& p, ld tau) {
  ld r = 0.0L;
  for (std::size_t y = 0; y < p.size(); ++y) {
    if (p[y] > 0.0) r += p[y] * comp_sum(h, y, tau);
  }
  return r;
}

// Best conditional risk over all scores: entropy at tau = 1, the power-mean
// value below 2, 1 - max p at 2 and (1 - max p) / (tau - 1) beyond.
inline ld cond_risk_star(const std::vector<double>& p, ld tau) {
  const ld pmax = *std::max_element(p.begin(), p.end());
  if (tau == 1.0L) {
    ld e = 0.0L;
    for (double v : p) {
      if (v > 0.0) e -= v * std::log(static_cast<ld>(v));
    }
    return e;
  }
  if (tau >= 2.0L) return (1.0L - pmax) / (tau - 1.0L);
  ld s = 0.0L;
  for (double v : p) {
    if (v > 0.0) s += std::pow(static_cast<ld>(v), 1.0L / (2.0L - tau));
  }
  return (std::pow(s, 2.0L - tau) - 1.0L) / (1.0L - tau);
}

// Four-branch transformation, evaluated literally.
inline ld transform(ld beta, ld tau, ld n) {
  if (tau >= 2.0L) return beta / ((tau - 1.0L) * std::pow(n, tau - 1.0L));
  if (tau == 1.0L) {
    const ld a = (1.0L + beta) / 2.0L * std::log(1.0L + beta);
    const ld b = beta < 1.0L ? (1.0L - beta) / 2.0L * std::log(1.0L - beta) : 0.0L;
    return a + b;
  }
  const ld r = 1.0L / (2.0L - tau);
  const ld mean = std::pow((std::pow(1.0L + beta, r) + std::pow(1.0L - beta, r)) / 2.0L, 2.0L - tau);
  if (tau < 1.0L) return std::pow(2.0L, 1.0L - tau) / (1.0L - tau) * (1.0L - mean);
  return (mean - 1.0L) / ((tau - 1.0L) * std::pow(n, tau - 1.0L));
}

inline ld transform_tilde(ld beta, ld tau, ld n) {
  if (tau < 1.0L) return beta * beta / (std::pow(2.0L, tau) * (2.0L - tau));
  if (tau < 2.0L) return beta * beta / (2.0L * std::pow(n, tau - 1.0L));
  return beta / ((tau - 1.0L) * std::pow(n, tau - 1.0L));
}

// Central differences of f at x, step h per coordinate.
inline std::vector<ld> central_gradient(const std::function<ld(const std::vector<double>&)>& f,
                                        const std::vector<double>& x, double h) {
  std::vector<ld> g(x.size());
  std::vector<double> xp = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    const ld up = f(xp);
    xp[i] = x[i] - h;
    const ld down = f(xp);
    xp[i] = x[i];
    g[i] = (up - down) / (2.0L * h);
  }
  return g;
}

// Relative error ||a - b||_2 / max(||b||_2, floor).
template <class A, class B>
ld relative_error(const A& a, const B& b, ld floor = 1e-12L) {
  ld num = 0.0L;
  ld den = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const ld d = static_cast<ld>(a[i]) - static_cast<ld>(b[i]);
    num += d * d;
    den += static_cast<ld>(b[i]) * static_cast<ld>(b[i]);
  }
  return std::sqrt(num) / std::max(std::sqrt(den), floor);
}

// Clamped ramp with the margin h(y) - h(y') as argument.
inline ld ramp(ld u, ld rho) { return std::min(std::max(1.0L - u / rho, 0.0L), 1.0L); }

}  // namespace oracle
