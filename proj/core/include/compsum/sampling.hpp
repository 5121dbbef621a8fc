#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "compsum/risk.hpp"

namespace compsum {

// Dirichlet(alpha, ..., alpha) draw; the last entry absorbs rounding so the
// sum is 1 to within an ulp.
std::vector<double> random_simplex(std::size_t n, double alpha, std::mt19937_64& rng);

CondDist random_cond_dist(std::size_t n, double alpha, std::mt19937_64& rng);

// k support points with Dirichlet(1) weights and Dirichlet(alpha) conditionals.
// Features are uniform in [-feature_range, feature_range]^feature_dim.
FiniteDistribution random_distribution(std::size_t k, std::size_t n, double alpha,
                                       std::mt19937_64& rng, std::size_t feature_dim = 0,
                                       double feature_range = 1.0);

// i.i.d. N(0, sd^2) scores.
std::vector<double> random_scores(std::size_t n, double sd, std::mt19937_64& rng);

}  // namespace compsum
