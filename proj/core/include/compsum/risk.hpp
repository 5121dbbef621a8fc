#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "compsum/loss.hpp"
#include "compsum/optimize.hpp"

namespace compsum {

// Conditional label distribution p(x, .). Entries sum to 1 within 1e-12.
class CondDist {
 public:
  explicit CondDist(std::vector<double> probs);

  static CondDist uniform(std::size_t n);
  static CondDist onehot(std::size_t n, std::size_t label);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const noexcept { return probs_; }

  // Most likely label, ties to the highest index.
  std::size_t mode() const;
  double max_prob() const;

 private:
  std::vector<double> probs_;
};

struct SupportPoint {
  double weight;
  CondDist cond;
  // Input features; required by linear hypothesis sets and the adversarial
  // module, empty otherwise.
  std::vector<double> features;
};

class FiniteDistribution {
 public:
  explicit FiniteDistribution(std::vector<SupportPoint> points);

  std::size_t num_labels() const noexcept { return n_; }
  std::size_t size() const noexcept { return points_.size(); }
  std::size_t feature_dim() const noexcept;
  const SupportPoint& operator[](std::size_t i) const { return points_[i]; }
  const std::vector<SupportPoint>& points() const noexcept { return points_; }

 private:
  std::vector<SupportPoint> points_;
  std::size_t n_;
};

// CSV with header "weight,p1,...,pn" optionally followed by "f1,...,fd".
FiniteDistribution read_distribution_csv(std::istream& in);
void write_distribution_csv(std::ostream& out, const FiniteDistribution& dist);

// Restricted hypothesis set over which infima are taken.
struct HypothesisSpec {
  enum class Kind { ScoreBox, Linear };

  // All scores in R^n at every point.
  static HypothesisSpec complete(std::size_t n);
  // Scores in [-lambda, lambda]^n at every point.
  static HypothesisSpec score_box(std::size_t n, double lambda);
  // Label-dependent bounds |h(x, y)| <= bounds[y]; not symmetric unless all
  // bounds agree.
  static HypothesisSpec label_box(std::vector<double> bounds);
  // h(x, y) = <w_y, phi(x)> (+ b_y) with every weight in [-bound, bound].
  static HypothesisSpec linear(std::size_t n, std::size_t feature_dim, double weight_bound,
                               bool bias = true);

  bool is_complete() const noexcept;
  bool is_symmetric() const noexcept;
  double lower(std::size_t label) const;
  double upper(std::size_t label) const;
  std::size_t num_params() const noexcept;

  Kind kind = Kind::ScoreBox;
  std::size_t n = 2;
  double lambda = std::numeric_limits<double>::infinity();
  std::vector<double> label_bounds;
  std::size_t feature_dim = 0;
  double weight_bound = 0.0;
  bool bias = true;
};

// Box half-width used by the brute-force oracle for complete hypothesis sets.
inline constexpr double kCompleteBox = 30.0;

// One score vector per support point.
struct ScoreAssignment {
  std::vector<std::vector<double>> scores;

  bool respects(const HypothesisSpec& spec, double tol = 1e-12) const;
};

// Scores produced by a linear spec with flattened weights [W (n x d), b (n)].
std::vector<double> linear_scores(const HypothesisSpec& spec, std::span<const double> params,
                                  std::span<const double> features);

double cond_risk(std::span<const double> scores, const CondDist& p, Tau tau);
double cond_risk_grad(std::span<const double> scores, const CondDist& p, Tau tau,
                      std::span<double> grad);

// Best conditional risk over all scores. For tau > 2 this is the corner value
// (1 - max p) / (tau - 1); see stationary_cond_risk for the interior point.
double cond_risk_star_closed(const CondDist& p, Tau tau);

struct StationaryValue {
  double value;
  bool smoothed;
};

// Conditional risk at the interior stationary point S*(y) = sum p^r / p_y^r,
// r = 1/(2 - tau). Zero probabilities are lifted to 1e-12 (and flagged) when
// tau > 2.
StationaryValue stationary_cond_risk(const CondDist& p, Tau tau);

// Scores h*(y) = r log p_y realizing S*. Requires tau != 2 and p > 0.
std::vector<double> stationary_scores(const CondDist& p, Tau tau);

// Partial derivatives of the conditional risk written through S(y):
// sum_y' p_y' S(y')^(-tau) dS(y')/dh(y).
std::vector<double> cond_risk_grad_from_s(std::span<const double> s_values, const CondDist& p,
                                          Tau tau);

struct BruteForceResult {
  double value;
  std::vector<double> argmin;
  bool converged;
};

// Minimizes cond_risk over the score box of the hypothesis set by multi-start projected
// gradient descent. Complete specs use the box [-kCompleteBox, kCompleteBox].
BruteForceResult cond_risk_star_brute(const CondDist& p, Tau tau, const HypothesisSpec& spec,
                                      const BoxMinimizerOptions& opts = {});

// Pointwise best conditional risk: closed form for complete specs, brute force
// otherwise. Linear specs need the point's features.
BruteForceResult pointwise_cond_risk_star(const SupportPoint& point, Tau tau,
                                          const HypothesisSpec& spec,
                                          const BoxMinimizerOptions& opts = {});

double calibration_gap(std::span<const double> scores, const CondDist& p, Tau tau,
                       const HypothesisSpec& spec, const BoxMinimizerOptions& opts = {});

struct GapResult {
  double gap;
  double best_in_class;
  double expected_pointwise;
  bool converged;
  // Minimizing parameters (linear) or per-point scores flattened (box).
  std::vector<double> argmin;
};

GapResult minimizability_gap(const FiniteDistribution& dist, const HypothesisSpec& spec, Tau tau,
                             const BoxMinimizerOptions& opts = {});

// Expected risk of a score assignment.
double expected_risk(const FiniteDistribution& dist, const ScoreAssignment& h, Tau tau);

// Pointwise best conditional risk for deterministic labels in [-lambda, lambda]^n:
// Phi^tau(exp(-2 lambda) (n - 1)).
double deterministic_cond_risk_star(std::size_t n, double lambda, Tau tau);

// Phi^tau(r0) - Phi^tau(exp(-2 lambda) (n - 1)) where r0 is the best-in-class
// sum-exponential risk.
double gap_upper_bound_deterministic(const HypothesisSpec& spec, Tau tau, double r_star_tau0);

}  // namespace compsum
