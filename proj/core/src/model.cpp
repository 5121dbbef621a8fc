#include "compsum/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace compsum {

namespace {

double sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

}  // namespace

DifferentiableModel::DifferentiableModel(Kind kind, std::size_t d, std::size_t h, std::size_t n)
    : kind_(kind), d_(d), h_(h), n_(n) {
  if (d == 0) throw std::invalid_argument("model input dimension must be >= 1");
  if (n < 2) throw std::invalid_argument("model needs n >= 2 labels");
  if (kind == Kind::Linear) {
    params_.assign(n * d + n, 0.0);
  } else {
    if (h == 0) throw std::invalid_argument("mlp hidden width must be >= 1");
    params_.assign(h * d + h + n * h + n, 0.0);
  }
}

DifferentiableModel DifferentiableModel::linear(std::size_t input_dim, std::size_t num_labels) {
  return DifferentiableModel(Kind::Linear, input_dim, 0, num_labels);
}

DifferentiableModel DifferentiableModel::mlp(std::size_t input_dim, std::size_t hidden,
                                             std::size_t num_labels) {
  return DifferentiableModel(Kind::Mlp, input_dim, hidden, num_labels);
}

void DifferentiableModel::set_parameters(std::span<const double> p) {
  if (p.size() != params_.size()) throw std::invalid_argument("parameter count mismatch");
  params_.assign(p.begin(), p.end());
}

void DifferentiableModel::init_random(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  if (kind_ == Kind::Linear) {
    const double s = 1.0 / std::sqrt(static_cast<double>(d_));
    for (std::size_t i = 0; i < n_ * d_; ++i) params_[i] = s * u(rng);
    for (std::size_t i = n_ * d_; i < params_.size(); ++i) params_[i] = 0.0;
    return;
  }
  const double s1 = 1.0 / std::sqrt(static_cast<double>(d_));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(h_));
  std::size_t o = 0;
  for (std::size_t i = 0; i < h_ * d_; ++i) params_[o++] = s1 * u(rng);
  for (std::size_t i = 0; i < h_; ++i) params_[o++] = 0.0;
  for (std::size_t i = 0; i < n_ * h_; ++i) params_[o++] = s2 * u(rng);
  for (std::size_t i = 0; i < n_; ++i) params_[o++] = 0.0;
}

std::vector<double> DifferentiableModel::forward(std::span<const double> x) const {
  if (x.size() != d_) throw std::invalid_argument("input dimension mismatch");
  std::vector<double> out(n_);
  const double* p = params_.data();
  if (kind_ == Kind::Linear) {
    for (std::size_t y = 0; y < n_; ++y) {
      double s = p[n_ * d_ + y];
      for (std::size_t k = 0; k < d_; ++k) s += p[y * d_ + k] * x[k];
      out[y] = s;
    }
  } else {
    const double* w1 = p;
    const double* b1 = w1 + h_ * d_;
    const double* w2 = b1 + h_;
    const double* b2 = w2 + n_ * h_;
    std::vector<double> a(h_);
    for (std::size_t j = 0; j < h_; ++j) {
      double z = b1[j];
      for (std::size_t k = 0; k < d_; ++k) z += w1[j * d_ + k] * x[k];
      a[j] = z * sigmoid(z);
    }
    for (std::size_t y = 0; y < n_; ++y) {
      double s = b2[y];
      for (std::size_t j = 0; j < h_; ++j) s += w2[y * h_ + j] * a[j];
      out[y] = s;
    }
  }
  for (double v : out) {
    if (!std::isfinite(v)) throw std::domain_error("model produced a non-finite score");
  }
  return out;
}

std::vector<double> DifferentiableModel::input_vjp(std::span<const double> x,
                                                   std::span<const double> upstream) const {
  if (x.size() != d_ || upstream.size() != n_) throw std::invalid_argument("vjp size mismatch");
  std::vector<double> gx(d_, 0.0);
  const double* p = params_.data();
  if (kind_ == Kind::Linear) {
    for (std::size_t y = 0; y < n_; ++y) {
      for (std::size_t k = 0; k < d_; ++k) gx[k] += upstream[y] * p[y * d_ + k];
    }
    return gx;
  }
  const double* w1 = p;
  const double* b1 = w1 + h_ * d_;
  const double* w2 = b1 + h_;
  for (std::size_t j = 0; j < h_; ++j) {
    double z = b1[j];
    for (std::size_t k = 0; k < d_; ++k) z += w1[j * d_ + k] * x[k];
    const double sg = sigmoid(z);
    const double dact = sg * (1.0 + z * (1.0 - sg));
    double ga = 0.0;
    for (std::size_t y = 0; y < n_; ++y) ga += upstream[y] * w2[y * h_ + j];
    const double gz = ga * dact;
    for (std::size_t k = 0; k < d_; ++k) gx[k] += gz * w1[j * d_ + k];
  }
  return gx;
}

void DifferentiableModel::param_vjp(std::span<const double> x, std::span<const double> upstream,
                                    std::span<double> grad) const {
  if (x.size() != d_ || upstream.size() != n_ || grad.size() != params_.size()) {
    throw std::invalid_argument("vjp size mismatch");
  }
  if (kind_ == Kind::Linear) {
    for (std::size_t y = 0; y < n_; ++y) {
      for (std::size_t k = 0; k < d_; ++k) grad[y * d_ + k] += upstream[y] * x[k];
      grad[n_ * d_ + y] += upstream[y];
    }
    return;
  }
  const double* p = params_.data();
  const double* w1 = p;
  const double* b1 = w1 + h_ * d_;
  const double* w2 = b1 + h_;
  double* gw1 = grad.data();
  double* gb1 = gw1 + h_ * d_;
  double* gw2 = gb1 + h_;
  double* gb2 = gw2 + n_ * h_;
  for (std::size_t y = 0; y < n_; ++y) gb2[y] += upstream[y];
  for (std::size_t j = 0; j < h_; ++j) {
    double z = b1[j];
    for (std::size_t k = 0; k < d_; ++k) z += w1[j * d_ + k] * x[k];
    const double sg = sigmoid(z);
    const double a = z * sg;
    const double dact = sg * (1.0 + z * (1.0 - sg));
    double ga = 0.0;
    for (std::size_t y = 0; y < n_; ++y) {
      gw2[y * h_ + j] += upstream[y] * a;
      ga += upstream[y] * w2[y * h_ + j];
    }
    const double gz = ga * dact;
    gb1[j] += gz;
    for (std::size_t k = 0; k < d_; ++k) gw1[j * d_ + k] += gz * x[k];
  }
}

double DifferentiableModel::weight(std::size_t label, std::size_t k) const {
  if (kind_ != Kind::Linear) throw std::logic_error("weight(): model is not linear");
  return params_.at(label * d_ + k);
}

double DifferentiableModel::bias(std::size_t label) const {
  if (kind_ != Kind::Linear) throw std::logic_error("bias(): model is not linear");
  return params_.at(n_ * d_ + label);
}

void write_checkpoint(std::ostream& out, const DifferentiableModel& model) {
  out << "compsum-model v1 " << (model.kind() == DifferentiableModel::Kind::Linear ? "linear" : "mlp")
      << ' ' << model.input_dim() << ' ' << model.hidden() << ' ' << model.num_labels() << ' '
      << model.num_params() << '\n';
  for (double v : model.parameters()) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(bits >> (8 * i));
    out.write(reinterpret_cast<const char*>(buf), 8);
  }
  if (!out) throw std::runtime_error("checkpoint write failed");
}

DifferentiableModel read_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("checkpoint: missing header");
  std::istringstream hs(line);
  std::string magic, version, kind;
  std::size_t d = 0, h = 0, n = 0, count = 0;
  if (!(hs >> magic >> version >> kind >> d >> h >> n >> count) || magic != "compsum-model" ||
      version != "v1") {
    throw std::runtime_error("checkpoint: bad header '" + line + "'");
  }
  DifferentiableModel m = kind == "linear" ? DifferentiableModel::linear(d, n)
                          : kind == "mlp"  ? DifferentiableModel::mlp(d, h, n)
                                           : throw std::runtime_error("checkpoint: unknown kind");
  if (count != m.num_params()) throw std::runtime_error("checkpoint: parameter count mismatch");
  std::vector<double> p(count);
  for (std::size_t i = 0; i < count; ++i) {
    unsigned char buf[8];
    if (!in.read(reinterpret_cast<char*>(buf), 8)) throw std::runtime_error("checkpoint: truncated");
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(buf[b]) << (8 * b);
    p[i] = std::bit_cast<double>(bits);
  }
  m.set_parameters(p);
  return m;
}

}  // namespace compsum
