#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "compsum/bounds.hpp"
#include "compsum/sampling.hpp"
#include "oracles.hpp"

using namespace compsum;

namespace {

ScoreAssignment random_assignment(const FiniteDistribution& d, std::mt19937_64& rng) {
  ScoreAssignment h;
  for (std::size_t i = 0; i < d.size(); ++i) h.scores.push_back(random_scores(d.num_labels(), 2.0, rng));
  return h;
}

// Expected zero-one excess computed directly from the conditionals.
double direct_lhs(const FiniteDistribution& d, const ScoreAssignment& h) {
  double s = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto& p = d[i].cond;
    const std::size_t pred = predicted_label(h.scores[i]);
    s += d[i].weight * (p.max_prob() - p[pred]);
  }
  return s;
}

std::vector<double> probs(const CondDist& p) { return {p.probs().begin(), p.probs().end()}; }

}  // namespace

TEST(Flags, Rendering) {
  EXPECT_EQ(flags_to_string(kFlagNone), "none");
  EXPECT_EQ(flags_to_string(kFlagPreconditionUnmet | kFlagVacuous), "precondition_unmet|vacuous");
}

TEST(ConsistencyBound, HoldsOnRandomCompleteInstances) {
  std::mt19937_64 rng(101);
  for (int i = 0; i < 60; ++i) {
    const std::size_t n = 2 + i % 5;
    const auto dist = random_distribution(1 + i % 4, n, 0.8, rng);
    const auto h = random_assignment(dist, rng);
    for (double tau : {0.0, 0.5, 1.0, 1.5, 2.0, 3.0}) {
      const auto r = verify_h_consistency_bound(dist, h, HypothesisSpec::complete(n), Tau(tau));
      EXPECT_NEAR(r.lhs, direct_lhs(dist, h), 1e-14);
      EXPECT_FALSE(r.violated(1e-9)) << "tau=" << tau << " slack=" << r.slack;
      EXPECT_EQ(r.flags & kFlagPreconditionUnmet, 0u);
      // rhs is the inverse transform of the expected calibration gap.
      double gap = 0.0;
      for (std::size_t k = 0; k < dist.size(); ++k) {
        gap += dist[k].weight *
               static_cast<double>(oracle::cond_risk(h.scores[k], probs(dist[k].cond), tau) -
                                   oracle::cond_risk_star(probs(dist[k].cond), tau));
      }
      EXPECT_NEAR(r.excess_surrogate, gap, 1e-9 * std::max(1.0, gap));
      if ((r.flags & kFlagVacuous) == 0 && r.rhs < 1.0) {
        EXPECT_NEAR(static_cast<double>(oracle::transform(r.rhs, tau, n)), gap,
                    1e-8 * std::max(1e-6, gap));
      }
    }
  }
}

TEST(ConsistencyBound, AsymmetricSetIsFlaggedNotViolated) {
  const FiniteDistribution dist({{1.0, CondDist({0.6, 0.4}), {}}});
  ScoreAssignment h{{{-1.0, 2.0}}};
  const auto r = verify_h_consistency_bound(dist, h, HypothesisSpec::label_box({1.0, 3.0}), Tau(1.0));
  EXPECT_NE(r.flags & kFlagPreconditionUnmet, 0u);
  EXPECT_FALSE(r.violated(1e-9));
}

TEST(Tightness, ZeroOneSideEqualsBetaAndSurrogateEqualsTransform) {
  for (double tau : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    for (double beta : {0.05, 0.3, 0.8}) {
      const auto inst = build_tightness_instance(beta, Tau(tau), 5);
      const auto r = evaluate_tightness(inst);
      EXPECT_NEAR(r.zero_one_side, beta, 1e-15);
      const double ref = static_cast<double>(oracle::transform(beta, tau, 5));
      EXPECT_NEAR(r.surrogate_side, ref, 1e-10 * std::max(1e-3, ref)) << tau << " " << beta;
      EXPECT_NEAR(r.transform_value, ref, 1e-12 * std::max(1e-3, ref));
    }
  }
}

TEST(Tightness, OutsideProvenRangeIsFlaggedAndStillBounded) {
  for (double tau : {1.5, 2.0, 3.0}) {
    const auto inst = build_tightness_instance(0.5, Tau(tau), 4);
    EXPECT_FALSE(inst.in_proven_range);
    const auto r = evaluate_tightness(inst);
    EXPECT_NE(r.flags & kFlagOutsideTightRange, 0u);
    EXPECT_GE(r.surrogate_side, r.transform_value);
  }
}

TEST(HBarMu, PreservesExpSumAndSwapsMass) {
  const std::vector<double> h{0.2, 1.5, -0.3, 0.9};
  HBarMuFamily fam(h, 3);
  EXPECT_EQ(fam.predicted(), 1u);
  const double mid = 0.5 * (fam.mu_lower() + fam.mu_upper());
  const auto moved = fam.at(mid);
  double s0 = 0.0, s1 = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    s0 += std::exp(h[i]);
    s1 += std::exp(moved[i]);
  }
  EXPECT_NEAR(s0, s1, 1e-12 * s0);
  EXPECT_EQ(moved[0], h[0]);
  EXPECT_EQ(moved[2], h[2]);
}

TEST(LemmaSup, ClosedMatchesNumeric) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    if (a + b > 1.0) {
      a *= 0.5;
      b *= 0.5;
    }
    double pmax = u(rng), phat = u(rng) * pmax;
    if (pmax + phat > 1.0) {
      pmax *= 0.5;
      phat *= 0.5;
    }
    const double tau = 3.0 * u(rng);
    const double c = lemma_sup_closed_normalized(a, b, pmax, phat, Tau(tau));
    const double nm = lemma_sup_numeric_normalized(a, b, pmax, phat, Tau(tau));
    EXPECT_NEAR(c, nm, 1e-7 * std::max(1.0, std::abs(c)));
    EXPECT_GE(c, -1e-12);
  }
}

TEST(LemmaInf, EqualityBelowTwoOneSidedAbove) {
  std::mt19937_64 rng(19);
  for (int i = 0; i < 10; ++i) {
    const CondDist p = random_cond_dist(3, 1.0, rng);
    const std::size_t wrong = (p.mode() + 1) % 3;
    for (double tau : {0.5, 1.0, 1.5, 2.5}) {
      const auto r = verify_lemma_inf(p, Tau(tau), wrong);
      EXPECT_TRUE(r.pass) << "tau=" << tau;
      EXPECT_EQ(r.equality_expected, tau <= 2.0);
      EXPECT_NEAR(r.closed, lemma_inf_closed(p, Tau(tau), wrong), 1e-15);
    }
  }
}

TEST(BoundCsv, HeaderAndRowWidthsAgree) {
  std::ostringstream os;
  write_bound_csv_header(os);
  BoundReport r;
  r.tau = 1.0;
  r.n = 3;
  write_bound_csv_row(os, r);
  const std::string s = os.str();
  const auto first = s.substr(0, s.find("\r\n"));
  const auto second = s.substr(first.size() + 2);
  EXPECT_EQ(std::count(first.begin(), first.end(), ','), std::count(second.begin(), second.end(), ','));
  EXPECT_NE(first.find("gap_surrogate"), std::string::npos);
}

TEST(LearningBound, DominatesRealizedExcess) {
  const FiniteDistribution dist({{0.5, CondDist({0.9, 0.1}), {}}, {0.5, CondDist({0.2, 0.8}), {}}});
  const auto spec = HypothesisSpec::score_box(2, 2.0);
  LearningBoundOptions opts;
  opts.rademacher_draws = 50;
  const auto r = learning_bound(dist, spec, Tau(1.0), 200, 0.05, 42, opts);
  EXPECT_EQ(r.m, 200u);
  EXPECT_GE(r.bound, r.realized_excess01);
  EXPECT_GT(r.rademacher, 0.0);
  EXPECT_NEAR(r.confidence_term, 2.0 * r.loss_cap * std::sqrt(std::log(2.0 / 0.05) / (2.0 * 200)), 1e-12);
}
