#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace compsum {

// Half-width of the windows around tau = 1 and tau = 2 where the closed
// special branches replace the generic formulas.
inline constexpr double kBranchWindow = 1e-9;

// Comp-sum exponent. Valid values lie in [0, kMax].
class Tau {
 public:
  static constexpr double kMax = 100.0;

  Tau() = default;
  explicit Tau(double value);

  double value() const noexcept { return value_; }
  bool near_one() const noexcept;
  bool near_two() const noexcept;

 private:
  double value_ = 1.0;
};

// Phi^tau(u) = ((1+u)^(1-tau) - 1) / (1 - tau), log(1+u) at tau = 1.
double phi_tau(double u, Tau tau);
double phi_tau_deriv(double u, Tau tau);

// Phi^tau(u) evaluated from L = log(1+u). Saturates at DBL_MAX.
double phi_tau_from_log1p(double log1p_u, Tau tau);

double log_sum_exp(std::span<const double> v);
std::vector<double> softmax(std::span<const double> scores);

// Index of the largest score; ties go to the highest index.
std::size_t predicted_label(std::span<const double> scores);

// Throws std::invalid_argument for n < 2 or a bad label and
// std::domain_error for non-finite scores.
void check_scores(std::span<const double> scores);
void check_label(std::span<const double> scores, std::size_t label);

double comp_sum_loss(std::span<const double> scores, std::size_t label, Tau tau);
std::vector<double> comp_sum_grad(std::span<const double> scores, std::size_t label,
                                  Tau tau);

// Loss value and gradient in one pass. Returns the loss.
double comp_sum_loss_grad(std::span<const double> scores, std::size_t label, Tau tau,
                          std::span<double> grad);

// Upper bound on the loss used by the learning bound. 1/(tau-1) for tau > 1.
// For tau <= 1 the loss is unbounded unless scores live in [-lambda, lambda].
double loss_cap(Tau tau, std::size_t n, std::optional<double> score_bound = {});

}  // namespace compsum
