#include "compsum/sampling.hpp"

#include <stdexcept>

namespace compsum {

std::vector<double> random_simplex(std::size_t n, double alpha, std::mt19937_64& rng) {
  if (n == 0) throw std::invalid_argument("random_simplex: n must be >= 1");
  std::gamma_distribution<double> g(alpha, 1.0);
  std::vector<double> p(n);
  double total = 0.0;
  while (total <= 0.0) {
    total = 0.0;
    for (double& v : p) {
      v = g(rng);
      total += v;
    }
  }
  double head = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    p[i] /= total;
    head += p[i];
  }
  p[n - 1] = head < 1.0 ? 1.0 - head : 0.0;
  return p;
}

CondDist random_cond_dist(std::size_t n, double alpha, std::mt19937_64& rng) {
  return CondDist(random_simplex(n, alpha, rng));
}

FiniteDistribution random_distribution(std::size_t k, std::size_t n, double alpha,
                                       std::mt19937_64& rng, std::size_t feature_dim,
                                       double feature_range) {
  const std::vector<double> w = random_simplex(k, 1.0, rng);
  std::uniform_real_distribution<double> u(-feature_range, feature_range);
  std::vector<SupportPoint> pts;
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<double> f(feature_dim);
    for (double& v : f) v = u(rng);
    pts.push_back({w[i], random_cond_dist(n, alpha, rng), std::move(f)});
  }
  return FiniteDistribution(std::move(pts));
}

std::vector<double> random_scores(std::size_t n, double sd, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, sd);
  std::vector<double> s(n);
  for (double& v : s) v = g(rng);
  return s;
}

}  // namespace compsum
