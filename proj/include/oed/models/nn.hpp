#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "oed/common/rng.hpp"

namespace oed::models {

using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// A trainable tensor with its gradient and Adam moments.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  Matrix m;
  Matrix v;

  Parameter() = default;
  Parameter(std::string n, Matrix init);
  void zero_grad() { grad.setZero(); }
};

/// Adaptive-moment optimizer with the usual defaults
/// (lr 1e-3, beta1 0.9, beta2 0.999, epsilon 1e-7).
class Adam {
 public:
  struct Options {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-7;
  };

  Adam() = default;
  explicit Adam(Options o) : options_(o) {}

  void step(const std::vector<Parameter*>& params);
  long steps() const { return t_; }

 private:
  Options options_{};
  long t_ = 0;
};

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// Binary cross-entropy of a logit: log(1 + e^z) - y z, computed stably.
inline double bce_with_logit(double z, double y) {
  return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

Matrix glorot_uniform(Eigen::Index rows, Eigen::Index cols, double fan_in, double fan_out, Rng& rng);
Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, double lo, double hi, Rng& rng);
/// Matrix with orthonormal columns (rows >= cols) or rows (rows < cols).
Matrix orthogonal(Eigen::Index rows, Eigen::Index cols, Rng& rng);

/// Binary dump of named parameters: count, then (name, rows, cols, doubles).
std::string serialize_parameters(const std::vector<const Parameter*>& params);
/// Restores values by name; throws ModelError on missing names or shape mismatch.
void deserialize_parameters(std::string_view blob, const std::vector<Parameter*>& params);

/// Little helpers for hand-rolled binary blobs.
class BlobWriter {
 public:
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void str(std::string_view s) {
    u64(s.size());
    out_.append(s);
  }
  void doubles(const double* data, std::size_t n) { raw(data, n * sizeof(double)); }
  std::string take() { return std::move(out_); }

 private:
  void raw(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
  std::string out_;
};

class BlobReader {
 public:
  explicit BlobReader(std::string_view in) : in_(in) {}
  std::uint64_t u64();
  double f64();
  std::string str();
  void doubles(double* data, std::size_t n);
  bool done() const { return pos_ == in_.size(); }

 private:
  void raw(void* p, std::size_t n);
  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace oed::models
