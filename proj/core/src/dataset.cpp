#include "compsum/dataset.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace compsum {

void MixtureSpec::validate() const {
  if (num_labels < 2) throw std::domain_error("mixture needs at least two labels");
  if (dim == 0) throw std::domain_error("mixture dimension must be positive");
  if (!(mean_scale >= 0.0) || !(noise > 0.0)) {
    throw std::domain_error("mixture mean_scale must be >= 0 and noise > 0");
  }
  if (!priors.empty()) {
    if (priors.size() != num_labels) throw std::domain_error("priors must have one entry per label");
    double total = 0.0;
    for (double p : priors) {
      if (!(p >= 0.0)) throw std::domain_error("priors must be nonnegative");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::domain_error("priors must sum to 1");
  }
}

void MarginSpec::validate() const {
  if (dim == 0) throw std::domain_error("margin task dimension must be positive");
  if (!(gap > 0.0) || !(robust_jitter >= 0.0) || !(weak_shift >= 0.0) || !(weak_noise >= 0.0)) {
    throw std::domain_error("margin task parameters out of range");
  }
}

std::vector<std::vector<double>> mixture_means(const MixtureSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::vector<double>> means(spec.num_labels, std::vector<double>(spec.dim));
  for (auto& m : means) {
    for (double& v : m) v = spec.mean_scale * gauss(rng);
  }
  return means;
}

namespace {

SyntheticDataset empty_like(std::size_t n, std::size_t d) {
  SyntheticDataset s;
  s.num_labels = n;
  s.dim = d;
  return s;
}

SyntheticDataset draw_mixture(const MixtureSpec& spec, const std::vector<std::vector<double>>& means,
                              std::size_t count, std::mt19937_64& rng) {
  SyntheticDataset s = empty_like(spec.num_labels, spec.dim);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> w = spec.priors;
  if (w.empty()) w.assign(spec.num_labels, 1.0);
  std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t y = pick(rng);
    std::vector<double> x(spec.dim);
    for (std::size_t k = 0; k < spec.dim; ++k) x[k] = means[y][k] + spec.noise * gauss(rng);
    s.inputs.push_back(std::move(x));
    s.labels.push_back(y);
  }
  return s;
}

SyntheticDataset draw_margin(const MarginSpec& spec, std::size_t count, std::mt19937_64& rng) {
  SyntheticDataset s = empty_like(2, spec.dim);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t y = coin(rng) ? 1 : 0;
    const double sign = y == 1 ? 1.0 : -1.0;
    std::vector<double> x(spec.dim);
    x[0] = sign * (spec.gap / 2.0 + spec.robust_jitter * std::abs(gauss(rng)));
    for (std::size_t k = 1; k < spec.dim; ++k) {
      x[k] = sign * spec.weak_shift + spec.weak_noise * gauss(rng);
    }
    s.inputs.push_back(std::move(x));
    s.labels.push_back(y);
  }
  return s;
}

}  // namespace

DatasetSplit make_mixture_task(const MixtureSpec& spec, std::size_t n_train,
                               std::size_t n_validation, std::size_t n_test, std::uint64_t seed) {
  const auto means = mixture_means(spec, seed);
  DatasetSplit out;
  std::mt19937_64 a(seed ^ 0x7261696eULL);
  std::mt19937_64 b(seed ^ 0x76616cULL);
  std::mt19937_64 c(seed ^ 0x74657374ULL);
  out.train = draw_mixture(spec, means, n_train, a);
  out.validation = draw_mixture(spec, means, n_validation, b);
  out.test = draw_mixture(spec, means, n_test, c);
  return out;
}

DatasetSplit make_margin_task(const MarginSpec& spec, std::size_t n_train,
                              std::size_t n_validation, std::size_t n_test, std::uint64_t seed) {
  spec.validate();
  DatasetSplit out;
  std::mt19937_64 a(seed ^ 0x7261696eULL);
  std::mt19937_64 b(seed ^ 0x76616cULL);
  std::mt19937_64 c(seed ^ 0x74657374ULL);
  out.train = draw_margin(spec, n_train, a);
  out.validation = draw_margin(spec, n_validation, b);
  out.test = draw_margin(spec, n_test, c);
  return out;
}

}  // namespace compsum
