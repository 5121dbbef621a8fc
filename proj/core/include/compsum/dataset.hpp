#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace compsum {

struct SyntheticDataset {
  std::vector<std::vector<double>> inputs;
  std::vector<std::size_t> labels;
  std::size_t num_labels = 0;
  std::size_t dim = 0;

  std::size_t size() const noexcept { return labels.size(); }
};

// Gaussian class-conditional mixture. Class means are mean_scale * N(0, I),
// shared between every split drawn from the same seed.
struct MixtureSpec {
  std::size_t num_labels = 10;
  std::size_t dim = 20;
  double mean_scale = 0.7;
  double noise = 1.0;
  std::vector<double> priors;  // empty means uniform

  void validate() const;
};

// Two labels, y in {-1, +1} mapped to {0, 1}. Feature 0 is
// y * (gap / 2 + robust_jitter * |N(0, 1)|); the remaining dim - 1 features are
// y * weak_shift + weak_noise * N(0, 1).
struct MarginSpec {
  std::size_t dim = 20;
  double gap = 1.0;
  double robust_jitter = 1.0;
  double weak_shift = 0.5;
  double weak_noise = 1.0;

  void validate() const;
  double designed_gamma() const noexcept { return gap / 2.0; }
};

struct DatasetSplit {
  SyntheticDataset train;
  SyntheticDataset validation;
  SyntheticDataset test;
};

std::vector<std::vector<double>> mixture_means(const MixtureSpec& spec, std::uint64_t seed);

DatasetSplit make_mixture_task(const MixtureSpec& spec, std::size_t n_train,
                               std::size_t n_validation, std::size_t n_test, std::uint64_t seed);

DatasetSplit make_margin_task(const MarginSpec& spec, std::size_t n_train,
                              std::size_t n_validation, std::size_t n_test, std::uint64_t seed);

}  // namespace compsum
