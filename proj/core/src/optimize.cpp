#include "compsum/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace compsum {

namespace {

void project(std::span<double> x, std::span<const double> lo, std::span<const double> hi) {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
}

double projected_grad_norm(std::span<const double> x, std::span<const double> g,
                           std::span<const double> lo, std::span<const double> hi) {
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double moved = std::clamp(x[i] - g[i], lo[i], hi[i]);
    m = std::max(m, std::abs(x[i] - moved));
  }
  return m;
}

}  // namespace

BoxMinimum descend_on_box(const Objective& f, std::span<const double> lower,
                          std::span<const double> upper, std::span<const double> start,
                          const BoxMinimizerOptions& opts) {
  const std::size_t d = start.size();
  std::vector<double> x(start.begin(), start.end());
  project(x, lower, upper);
  std::vector<double> g(d), g_new(d), trial(d);
  double fx = f(x, g);

  double step = 1.0;
  int stalls = 0;
  BoxMinimum out;
  std::vector<double> x_prev, g_prev;
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    if (projected_grad_norm(x, g, lower, upper) < opts.grad_tol) {
      out.converged = true;
      break;
    }
    if (!x_prev.empty()) {
      // Barzilai-Borwein trial step, safeguarded.
      double ss = 0.0, sy = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        const double si = x[i] - x_prev[i];
        ss += si * si;
        sy += si * (g[i] - g_prev[i]);
      }
      if (sy > 0.0 && ss > 0.0) step = std::clamp(ss / sy, 1e-12, 1e12);
    }
    bool accepted = false;
    while (step > 1e-30) {
      for (std::size_t i = 0; i < d; ++i) trial[i] = x[i] - step * g[i];
      project(trial, lower, upper);
      double decrease = 0.0;
      for (std::size_t i = 0; i < d; ++i) decrease += g[i] * (x[i] - trial[i]);
      if (decrease <= 0.0) break;
      const double f_trial = f(trial, g_new);
      if (f_trial <= fx - 1e-4 * decrease) {
        const double gain = fx - f_trial;
        x_prev = x;
        g_prev = g;
        x.swap(trial);
        g.swap(g_new);
        fx = f_trial;
        accepted = true;
        step = std::min(step * 2.0, 1e12);
        stalls = gain <= 1e-16 * std::max(1.0, std::abs(fx)) ? stalls + 1 : 0;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No representable descent step left: x is stationary to working precision.
      out.converged = true;
      break;
    }
    if (stalls >= 20) {
      out.converged = true;
      break;
    }
  }
  out.value = fx;
  out.argmin = std::move(x);
  out.iterations = it;
  return out;
}

BoxMinimum minimize_on_box(const Objective& f, std::span<const double> lower,
                           std::span<const double> upper,
                           const std::vector<std::vector<double>>& extra_starts,
                           const BoxMinimizerOptions& opts) {
  const std::size_t d = lower.size();
  if (upper.size() != d) throw std::invalid_argument("minimize_on_box: bound size mismatch");
  for (std::size_t i = 0; i < d; ++i) {
    if (!(lower[i] <= upper[i])) throw std::invalid_argument("minimize_on_box: empty box");
  }
  std::vector<std::vector<double>> starts = extra_starts;
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int s = 0; s < opts.random_starts; ++s) {
    std::vector<double> x(d);
    for (std::size_t i = 0; i < d; ++i) {
      // Random starts concentrate near the middle of wide boxes.
      const double lo = std::max(lower[i], -5.0);
      const double hi = std::min(upper[i], 5.0);
      x[i] = lo <= hi ? lo + (hi - lo) * unit(rng) : lower[i] + (upper[i] - lower[i]) * unit(rng);
    }
    starts.push_back(std::move(x));
  }
  if (starts.empty()) starts.emplace_back(d, 0.0);

  BoxMinimum best;
  bool have = false;
  for (const auto& s : starts) {
    if (s.size() != d) throw std::invalid_argument("minimize_on_box: start size mismatch");
    BoxMinimum r = descend_on_box(f, lower, upper, s, opts);
    if (!have || r.value < best.value) {
      best = std::move(r);
      have = true;
    }
  }
  return best;
}

double golden_section_max(const std::function<double(double)>& f, double a, double b,
                          double tol, double* argmax) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  const double fx = f(x);
  double best_x = x;
  double best = fx;
  if (fc > best) {
    best = fc;
    best_x = c;
  }
  if (fd > best) {
    best = fd;
    best_x = d;
  }
  if (argmax) *argmax = best_x;
  return best;
}

}  // namespace compsum
