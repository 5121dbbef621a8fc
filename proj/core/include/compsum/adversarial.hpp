#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "compsum/bounds.hpp"
#include "compsum/loss.hpp"
#include "compsum/model.hpp"
#include "compsum/risk.hpp"

namespace compsum {

enum class PNorm { L1, L2, LInf };

struct PerturbationBall {
  PNorm norm = PNorm::LInf;
  double gamma = 0.0;

  // p must be 1, 2 or infinity; gamma >= 0 (0 is the degenerate ball).
  static PerturbationBall make(double p, double gamma);
  double p_value() const noexcept;
};

double norm_of(std::span<const double> v, PNorm norm);
double dual_norm_of(std::span<const double> v, PNorm norm);

// Euclidean projection of x onto the ball around center, in place.
void project_to_ball(std::span<double> x, std::span<const double> center,
                     const PerturbationBall& ball);
std::vector<double> random_point_in_ball(std::span<const double> center,
                                         const PerturbationBall& ball, std::mt19937_64& rng);

struct AdvParams {
  double rho = 1.0;
  double nu = 1.0;
  int pgd_steps = 10;
  // 0 selects 2.5 * gamma / pgd_steps.
  double pgd_step_size = 0.0;
  int restarts = 1;
  std::uint64_t seed = 0;
  // Accept nu below sqrt(n - 1) / rho (the empirical setting rho = nu = 1).
  bool allow_small_nu = false;

  // rho = 1, nu = max(1, sqrt(n - 1) / rho).
  static AdvParams defaults(std::size_t n);
  static double min_nu(std::size_t n, double rho);
  // Throws std::domain_error when the constraints fail.
  void validate(std::size_t n) const;
  double step_size(double gamma) const;
};

double rho_margin(double u, double rho);
// Subgradient: -1/rho inside (0, rho), 0 outside, -1/(2 rho) at the kinks.
double rho_margin_slope(double u, double rho);

// Phi^tau(sum_{y' != y} Phi_rho(h(y) - h(y'))) at fixed scores.
double rho_margin_comp_loss(std::span<const double> scores, std::size_t y, Tau tau, double rho);

struct AttackResult {
  double value;
  std::vector<double> point;
};

// Sup over the ball of the rho-margin comp-sum loss, by PGD ascent with
// restarts. Lower bound on the true sup.
AttackResult attack_comp_rho(const DifferentiableModel& model, std::span<const double> x,
                             std::size_t y, Tau tau, const AdvParams& adv,
                             const PerturbationBall& ball);
double adv_comp_rho_loss(const DifferentiableModel& model, std::span<const double> x,
                         std::size_t y, Tau tau, const AdvParams& adv,
                         const PerturbationBall& ball);

// Sup over the ball of |Dbar(x', y) - Dbar(x, y)|_2 where Dbar collects the
// score differences h(y) - h(y').
AttackResult attack_deviation(const DifferentiableModel& model, std::span<const double> x,
                              std::size_t y, const AdvParams& adv, const PerturbationBall& ball);

// comp_sum_loss(h(x)/rho) + nu * sup deviation.
double smooth_adv_comp_loss(const DifferentiableModel& model, std::span<const double> x,
                            std::size_t y, Tau tau, const AdvParams& adv,
                            const PerturbationBall& ball);

// Margin attack: maximizes max_{y' != y} h(y') - h(y). The point returned is
// the most violating point seen.
AttackResult attack_margin(const DifferentiableModel& model, std::span<const double> x,
                           std::size_t y, const PerturbationBall& ball, const AdvParams& attack);
int adv_zero_one(const DifferentiableModel& model, std::span<const double> x, std::size_t y,
                 const PerturbationBall& ball, const AdvParams& attack);

// Exact values for linear models on one-dimensional inputs.
int exact_adv_zero_one_1d(const DifferentiableModel& model, double x, std::size_t y, double gamma);
double exact_adv_comp_rho_1d(const DifferentiableModel& model, double x, std::size_t y, Tau tau,
                             double rho, double gamma);
double exact_deviation_sup_1d(const DifferentiableModel& model, std::size_t y, double gamma);

struct LocalConsistency {
  bool pass;
  std::string witness_kind;  // "staircase", "constant", "axis" or "none"
  std::vector<double> witness;  // scores (box) or flattened linear parameters
  std::string reason;
};

std::vector<LocalConsistency> check_local_rho_consistency(
    const HypothesisSpec& spec, const std::vector<std::vector<double>>& points, double rho,
    const PerturbationBall& ball);

struct AdvBoundReport {
  BoundReport bound;         // rhs = Phi^tau(1) * E[surrogate calibration gap]
  double rhs_smooth;         // same with the smooth loss
  double rhs_reciprocal;     // E[surrogate calibration gap] / Phi^tau(1)
  double slack_reciprocal;
  double multiplier;         // Phi^tau(1)
  double cond_star_zero_one; // E[C*_gamma]
  double cond_star_surrogate;
  double analytic_star_zero_one;
  double analytic_star_surrogate;
};

// Adversarial bound on a distribution over one-dimensional inputs (features
// of the support points) for two labels and a linear hypothesis set with
// bias. Inner sups are evaluated exactly; infima over the set by a grid over
// the score-difference parameters.
AdvBoundReport verify_adv_bound(const FiniteDistribution& dist, const HypothesisSpec& spec,
                                const DifferentiableModel& h, Tau tau, const AdvParams& adv,
                                const PerturbationBall& ball, int grid = 201);

}  // namespace compsum
