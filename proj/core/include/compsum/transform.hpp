#pragma once

#include <cstddef>
#include <stdexcept>

#include "compsum/loss.hpp"

namespace compsum {

struct TransformParams {
  TransformParams(Tau tau, std::size_t n);

  Tau tau;
  std::size_t n;
};

// Raised by gamma_tau when t exceeds T_tau(1).
class GammaRangeError : public std::range_error {
 public:
  GammaRangeError(double t, double attainable_max);
  double requested() const noexcept { return requested_; }
  double attainable_max() const noexcept { return attainable_max_; }

 private:
  double requested_;
  double attainable_max_;
};

// Convex increasing transformation T_tau on [0, 1].
double t_tau(double beta, const TransformParams& params);

// Inverse of t_tau by bisection.
double gamma_tau(double t, const TransformParams& params);

// Polynomial lower bound on t_tau and its inverse.
double t_tilde(double beta, const TransformParams& params);
double gamma_tilde(double t, const TransformParams& params);

// Two-argument form with psi_tau(1, beta) = t_tau(beta). Evaluated through
// power means, independently of the log-space route used by t_tau.
double psi_tau(double alpha, double beta, const TransformParams& params);

}  // namespace compsum
