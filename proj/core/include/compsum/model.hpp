#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

namespace compsum {

// Score model x -> h(x, .) with hand-written backward passes.
// Linear: [W (n x d), b (n)]. MLP with SiLU hidden layer:
// [W1 (H x d), b1 (H), W2 (n x H), b2 (n)].
class DifferentiableModel {
 public:
  enum class Kind { Linear, Mlp };

  static DifferentiableModel linear(std::size_t input_dim, std::size_t num_labels);
  static DifferentiableModel mlp(std::size_t input_dim, std::size_t hidden, std::size_t num_labels);

  Kind kind() const noexcept { return kind_; }
  std::size_t input_dim() const noexcept { return d_; }
  std::size_t hidden() const noexcept { return h_; }
  std::size_t num_labels() const noexcept { return n_; }
  std::size_t num_params() const noexcept { return params_.size(); }

  std::span<double> parameters() noexcept { return params_; }
  std::span<const double> parameters() const noexcept { return params_; }
  void set_parameters(std::span<const double> p);

  // Scaled uniform initialization (fan-in), deterministic in rng.
  void init_random(std::mt19937_64& rng);

  std::vector<double> forward(std::span<const double> x) const;

  // upstream^T d scores / d x.
  std::vector<double> input_vjp(std::span<const double> x, std::span<const double> upstream) const;

  // Adds upstream^T d scores / d theta into grad.
  void param_vjp(std::span<const double> x, std::span<const double> upstream,
                 std::span<double> grad) const;

  // Weight rows for the linear kind.
  double weight(std::size_t label, std::size_t k) const;
  double bias(std::size_t label) const;

 private:
  DifferentiableModel(Kind kind, std::size_t d, std::size_t h, std::size_t n);

  Kind kind_;
  std::size_t d_;
  std::size_t h_;
  std::size_t n_;
  std::vector<double> params_;
};

// Checkpoint: one text line "compsum-model v1 <kind> <d> <hidden> <n> <count>"
// followed by <count> little-endian float64 parameters.
void write_checkpoint(std::ostream& out, const DifferentiableModel& model);
DifferentiableModel read_checkpoint(std::istream& in);

}  // namespace compsum
