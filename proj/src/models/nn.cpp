#include "oed/models/nn.hpp"

#include <cstring>
#include <map>

#include <Eigen/QR>

#include "oed/models/classifier.hpp"

namespace oed::models {

Parameter::Parameter(std::string n, Matrix init)
    : name(std::move(n)),
      value(std::move(init)),
      grad(Matrix::Zero(value.rows(), value.cols())),
      m(Matrix::Zero(value.rows(), value.cols())),
      v(Matrix::Zero(value.rows(), value.cols())) {}

void Adam::step(const std::vector<Parameter*>& params) {
  ++t_;
  const double correction = std::sqrt(1.0 - std::pow(options_.beta2, static_cast<double>(t_))) /
                            (1.0 - std::pow(options_.beta1, static_cast<double>(t_)));
  const double lr_t = options_.learning_rate * correction;
  for (Parameter* p : params) {
    p->m = options_.beta1 * p->m + (1.0 - options_.beta1) * p->grad;
    p->v = options_.beta2 * p->v + (1.0 - options_.beta2) * p->grad.cwiseProduct(p->grad);
    p->value.array() -= lr_t * p->m.array() / (p->v.array().sqrt() + options_.epsilon);
  }
}

Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, double lo, double hi, Rng& rng) {
  Matrix out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = rng.uniform(lo, hi);
  }
  return out;
}

Matrix glorot_uniform(Eigen::Index rows, Eigen::Index cols, double fan_in, double fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  return uniform_matrix(rows, cols, -limit, limit, rng);
}

Matrix orthogonal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const bool tall = rows >= cols;
  const Eigen::Index big = tall ? rows : cols;
  const Eigen::Index small = tall ? cols : rows;
  Matrix a(big, small);
  for (Eigen::Index r = 0; r < big; ++r) {
    for (Eigen::Index c = 0; c < small; ++c) a(r, c) = rng.normal();
  }
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(big, small);
  const Matrix r = qr.matrixQR().topLeftCorner(small, small);
  for (Eigen::Index c = 0; c < small; ++c) {
    if (r(c, c) < 0) q.col(c) *= -1.0;
  }
  return tall ? q : Matrix(q.transpose());
}

std::string serialize_parameters(const std::vector<const Parameter*>& params) {
  BlobWriter w;
  w.u64(params.size());
  for (const Parameter* p : params) {
    w.str(p->name);
    w.u64(static_cast<std::uint64_t>(p->value.rows()));
    w.u64(static_cast<std::uint64_t>(p->value.cols()));
    w.doubles(p->value.data(), static_cast<std::size_t>(p->value.size()));
  }
  return w.take();
}

void deserialize_parameters(std::string_view blob, const std::vector<Parameter*>& params) {
  std::map<std::string, Parameter*> by_name;
  for (Parameter* p : params) by_name[p->name] = p;
  BlobReader r(blob);
  const auto count = r.u64();
  if (count != params.size()) throw ModelError("checkpoint holds " + std::to_string(count) + " parameters, model has " + std::to_string(params.size()));
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::string name = r.str();
    const auto rows = static_cast<Eigen::Index>(r.u64());
    const auto cols = static_cast<Eigen::Index>(r.u64());
    auto it = by_name.find(name);
    if (it == by_name.end()) throw ModelError("checkpoint has unknown parameter \"" + name + "\"");
    Parameter& p = *it->second;
    if (p.value.rows() != rows || p.value.cols() != cols) {
      throw ModelError("checkpoint parameter \"" + name + "\" has the wrong shape");
    }
    r.doubles(p.value.data(), static_cast<std::size_t>(p.value.size()));
  }
}

void BlobReader::raw(void* p, std::size_t n) {
  if (pos_ + n > in_.size()) throw ModelError("truncated model blob");
  std::memcpy(p, in_.data() + pos_, n);
  pos_ += n;
}

std::uint64_t BlobReader::u64() {
  std::uint64_t v;
  raw(&v, sizeof v);
  return v;
}

double BlobReader::f64() {
  double v;
  raw(&v, sizeof v);
  return v;
}

std::string BlobReader::str() {
  const auto n = u64();
  if (pos_ + n > in_.size()) throw ModelError("truncated model blob");
  std::string s(in_.substr(pos_, n));
  pos_ += n;
  return s;
}

void BlobReader::doubles(double* data, std::size_t n) { raw(data, n * sizeof(double)); }

}  // namespace oed::models
