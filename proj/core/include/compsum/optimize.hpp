#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace compsum {

// Objective returning f(x) and writing the gradient into its second argument.
using Objective = std::function<double(std::span<const double>, std::span<double>)>;

struct BoxMinimizerOptions {
  int random_starts = 8;
  int max_iterations = 10000;
  double grad_tol = 1e-10;
  std::uint64_t seed = 0x5eed;
};

struct BoxMinimum {
  double value = 0.0;
  std::vector<double> argmin;
  bool converged = false;
  int iterations = 0;
};

// Multi-start projected gradient descent on the box [lower, upper].
// Each start uses Barzilai-Borwein trial steps with Armijo backtracking.
// Extra starts are tried before the random ones; the lowest value wins,
// ties resolved by start order.
BoxMinimum minimize_on_box(const Objective& f, std::span<const double> lower,
                           std::span<const double> upper,
                           const std::vector<std::vector<double>>& extra_starts,
                           const BoxMinimizerOptions& opts);

// Single descent from one starting point.
BoxMinimum descend_on_box(const Objective& f, std::span<const double> lower,
                          std::span<const double> upper, std::span<const double> start,
                          const BoxMinimizerOptions& opts);

// Golden-section maximization of a unimodal function on [a, b].
double golden_section_max(const std::function<double(double)>& f, double a, double b,
                          double tol, double* argmax = nullptr);

}  // namespace compsum
