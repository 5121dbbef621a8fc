#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "compsum/loss.hpp"
#include "compsum/risk.hpp"
#include "compsum/transform.hpp"

namespace compsum {

enum BoundFlag : unsigned {
  kFlagNone = 0,
  kFlagPreconditionUnmet = 1u << 0,
  kFlagBoxApprox = 1u << 1,
  kFlagVacuous = 1u << 2,
  kFlagOutsideTightRange = 1u << 3,
  kFlagNotConverged = 1u << 4,
  kFlagViolation = 1u << 5,
  kFlagSmoothed = 1u << 6,
};

// "precondition_unmet|vacuous" style rendering; "none" when empty.
std::string flags_to_string(unsigned flags);

struct PointDiagnostic {
  double weight;
  std::size_t y_max;
  std::size_t predicted;
  double zero_one_gap;   // p(y_max) - p(predicted)
  double surrogate_gap;  // C(h, x) - C*(x)
};

struct BoundReport {
  double tau = 0.0;
  std::size_t n = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  double gap01 = 0.0;
  double gap_surrogate = 0.0;
  double excess01 = 0.0;
  double excess_surrogate = 0.0;
  unsigned flags = kFlagNone;
  std::vector<PointDiagnostic> points;

  bool violated(double tol) const;
};

void write_bound_csv_header(std::ostream& out);
void write_bound_csv_row(std::ostream& out, const BoundReport& r);

// Zero-one side E[p(y_max) - p(h_hat)] against Gamma_tau of the expected
// calibration gap, with closed-form best conditional risks. Non-symmetric or
// non-complete specs are flagged instead of counted as violations.
BoundReport verify_h_consistency_bound(const FiniteDistribution& dist,
                                       const ScoreAssignment& assignment,
                                       const HypothesisSpec& spec, Tau tau);

struct TightnessInstance {
  double beta;
  Tau tau;
  FiniteDistribution dist;
  ScoreAssignment witness;
  bool in_proven_range;
};

// Singleton with p = ((1+beta)/2, (1-beta)/2, 0, ...) and witness scores
// (0, 0, -floor, ...).
TightnessInstance build_tightness_instance(double beta, Tau tau, std::size_t n,
                                           double floor_lambda = 40.0);

struct TightnessResult {
  double zero_one_side;
  double surrogate_side;
  double transform_value;
  unsigned flags;
};

TightnessResult evaluate_tightness(const TightnessInstance& inst);

// Scores moved along the exp-sum preserving family that trades mass between
// the predicted label and y_max.
class HBarMuFamily {
 public:
  HBarMuFamily(std::vector<double> base, std::size_t y_max);

  std::size_t y_max() const noexcept { return y_max_; }
  std::size_t predicted() const noexcept { return predicted_; }
  // Open interval of admissible mu.
  double mu_lower() const noexcept;
  double mu_upper() const noexcept;
  std::vector<double> at(double mu) const;
  // exp values relative to max(base).
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }

 private:
  std::vector<double> base_;
  std::size_t y_max_;
  std::size_t predicted_;
  double shift_;
  double a_;
  double b_;
};

std::vector<double> hbar_mu_scores(std::span<const double> scores, std::size_t y_max, double mu);

// C(h, x) - inf_mu C(hbar_mu, x), closed form.
double lemma_sup_closed(std::span<const double> scores, const CondDist& p, Tau tau);
// Same quantity from a 512-point mu grid refined by golden section.
double lemma_sup_numeric(std::span<const double> scores, const CondDist& p, Tau tau);

// Both lemma quantities on normalized exp values: a = e^{h(y_max)}/S,
// b = e^{h(predicted)}/S with a <= b, a + b <= 1.
double lemma_sup_closed_normalized(double a, double b, double p_max, double p_hat, Tau tau);
double lemma_sup_numeric_normalized(double a, double b, double p_max, double p_hat, Tau tau);

struct LemmaInfCheck {
  double closed;    // four-branch closed form
  double brute;     // numeric infimum over scores
  double psi;       // psi_tau(alpha, beta)
  double alpha;
  double beta;
  bool equality_expected;
  bool pass;
};

// Infimum over scores predicting `predicted` of the lemma-sup quantity.
// Equality with the closed form is required for tau <= 2; above 2 the closed
// form is only a lower bound and the check is one-sided.
LemmaInfCheck verify_lemma_inf(const CondDist& p, Tau tau, std::size_t predicted,
                               double tol = 1e-6);
double lemma_inf_closed(const CondDist& p, Tau tau, std::size_t predicted);

struct LearningBoundOptions {
  int rademacher_draws = 200;
  BoxMinimizerOptions optimizer{};
};

struct LearningBoundResult {
  double bound;
  bool vacuous;
  double rademacher;
  double rademacher_stderr;
  double loss_cap;
  double confidence_term;
  double gap_surrogate;
  double gap01;
  double realized_excess01;
  double empirical_surrogate_risk;
  std::size_t m;
};

// Samples m labelled points from dist, fits the empirical surrogate minimizer
// over a score box spec and evaluates the zero-one estimation bound.
LearningBoundResult learning_bound(const FiniteDistribution& dist, const HypothesisSpec& spec,
                                   Tau tau, std::size_t m, double delta, std::uint64_t seed,
                                   const LearningBoundOptions& opts = {});

}  // namespace compsum
