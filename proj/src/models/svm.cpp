#include "oed/models/svm.hpp"

#include <cmath>
#include <limits>
#include <list>
#include <unordered_map>

#include "oed/featurize/vocabulary.hpp"

namespace oed::models {

namespace {

constexpr double kTau = 1e-12;

/// Least-recently-used cache of kernel matrix rows.
class RowCache {
 public:
  RowCache(std::size_t n, std::size_t megabytes)
      : capacity_(std::max<std::size_t>(2, megabytes * 1024 * 1024 / (std::max<std::size_t>(n, 1) * sizeof(double)))) {}

  template <class Compute>
  const std::vector<double>& row(std::size_t i, Compute&& compute) {
    if (auto it = index_.find(i); it != index_.end()) {
      order_.splice(order_.begin(), order_, it->second);
      return it->second->second;
    }
    if (order_.size() >= capacity_) {
      index_.erase(order_.back().first);
      order_.pop_back();
    }
    order_.emplace_front(i, compute(i));
    index_[i] = order_.begin();
    return order_.front().second;
  }

 private:
  using Entry = std::pair<std::size_t, std::vector<double>>;
  std::size_t capacity_;
  std::list<Entry> order_;
  std::unordered_map<std::size_t, std::list<Entry>::iterator> index_;
};

}  // namespace

KernelSvm::KernelSvm(SvmConfig config) : config_(config) {
  if (config_.c <= 0) throw UsageError("SVM C must be positive");
  if (config_.tolerance <= 0) throw UsageError("SVM tolerance must be positive");
}

double KernelSvm::kernel(const RowVector& a, const RowVector& b) const {
  switch (config_.kernel) {
    case SvmKernel::kLinear: return a.dot(b);
    case SvmKernel::kPolynomial: return std::pow(gamma_ * a.dot(b) + config_.coef0, config_.degree);
    case SvmKernel::kRbf: return std::exp(-gamma_ * (a - b).squaredNorm());
    case SvmKernel::kSigmoid: return std::tanh(gamma_ * a.dot(b) + config_.coef0);
  }
  return 0;
}

void KernelSvm::fit(const RowMatrix& x, std::span<const int> labels) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (n != labels.size()) throw ModelError("SVM got " + std::to_string(n) + " samples and " + std::to_string(labels.size()) + " labels");
  if (n == 0) throw ModelError("SVM training set is empty");

  const double mean = x.mean();
  const double var = (x.array() - mean).square().mean();
  gamma_ = var > 0 ? 1.0 / (static_cast<double>(x.cols()) * var) : 1.0;

  std::vector<double> y(n);
  bool seen[2] = {false, false};
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = labels[i] == 1 ? 1.0 : -1.0;
    seen[labels[i] == 1] = true;
  }
  iterations_ = 0;
  if (!seen[0] || !seen[1]) {
    constant_ = seen[1] ? 1 : 0;
    support_.resize(0, x.cols());
    coef_.resize(0);
    rho_ = 0;
    return;
  }
  constant_ = -1;

  const double c = config_.c;
  std::vector<double> qd(n);
  for (std::size_t i = 0; i < n; ++i) qd[i] = kernel(x.row(static_cast<Eigen::Index>(i)), x.row(static_cast<Eigen::Index>(i)));
  RowCache cache(n, config_.cache_mb);
  auto q_row = [&](std::size_t i) -> const std::vector<double>& {
    return cache.row(i, [&](std::size_t r) {
      std::vector<double> out(n);
      const RowVector xr = x.row(static_cast<Eigen::Index>(r));
      for (std::size_t j = 0; j < n; ++j) out[j] = y[r] * y[j] * kernel(xr, x.row(static_cast<Eigen::Index>(j)));
      return out;
    });
  };

  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);
  auto upper = [&](std::size_t t) { return alpha[t] >= c; };
  auto lower = [&](std::size_t t) { return alpha[t] <= 0; };

  const long max_iter = std::max<long>(10000000, n > std::numeric_limits<long>::max() / 100 ? std::numeric_limits<long>::max() : 100 * static_cast<long>(n));
  for (; iterations_ < max_iter; ++iterations_) {
    double gmax = -std::numeric_limits<double>::infinity();
    long gmax_idx = -1;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] > 0) {
        if (!upper(t) && -grad[t] >= gmax) { gmax = -grad[t]; gmax_idx = static_cast<long>(t); }
      } else if (!lower(t) && grad[t] >= gmax) {
        gmax = grad[t];
        gmax_idx = static_cast<long>(t);
      }
    }
    if (gmax_idx < 0) break;
    const auto i = static_cast<std::size_t>(gmax_idx);
    const std::vector<double> qi = q_row(i);

    double gmax2 = -std::numeric_limits<double>::infinity();
    long gmin_idx = -1;
    double obj_min = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      double grad_diff;
      double quad;
      if (y[j] > 0) {
        if (lower(j)) continue;
        grad_diff = gmax + grad[j];
        gmax2 = std::max(gmax2, grad[j]);
        quad = qd[i] + qd[j] - 2.0 * y[i] * qi[j];
      } else {
        if (upper(j)) continue;
        grad_diff = gmax - grad[j];
        gmax2 = std::max(gmax2, -grad[j]);
        quad = qd[i] + qd[j] + 2.0 * y[i] * qi[j];
      }
      if (grad_diff > 0) {
        const double obj = -(grad_diff * grad_diff) / (quad > 0 ? quad : kTau);
        if (obj <= obj_min) {
          gmin_idx = static_cast<long>(j);
          obj_min = obj;
        }
      }
    }
    if (gmax + gmax2 < config_.tolerance || gmin_idx < 0) break;
    const auto j = static_cast<std::size_t>(gmin_idx);
    const std::vector<double>& qj = q_row(j);

    const double old_i = alpha[i];
    const double old_j = alpha[j];
    if (y[i] != y[j]) {
      double quad = qd[i] + qd[j] + 2.0 * qi[j];
      if (quad <= 0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = diff; }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = -diff;
      }
      if (diff > 0) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = c - diff; }
      } else if (alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      double quad = qd[i] + qd[j] - 2.0 * qi[j];
      if (quad <= 0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = sum - c; }
      } else if (alpha[j] < 0) {
        alpha[j] = 0;
        alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = sum - c; }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = sum;
      }
    }
    const double di = alpha[i] - old_i;
    const double dj = alpha[j] - old_j;
    for (std::size_t k = 0; k < n; ++k) grad[k] += qi[k] * di + qj[k] * dj;
  }

  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (upper(t)) {
      if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (lower(t)) {
      if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++free_count;
      sum_free += yg;
    }
  }
  rho_ = free_count > 0 ? sum_free / static_cast<double>(free_count) : (ub + lb) / 2;

  std::vector<Eigen::Index> sv;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0) sv.push_back(static_cast<Eigen::Index>(t));
  }
  support_.resize(static_cast<Eigen::Index>(sv.size()), x.cols());
  coef_.resize(static_cast<Eigen::Index>(sv.size()));
  for (std::size_t k = 0; k < sv.size(); ++k) {
    support_.row(static_cast<Eigen::Index>(k)) = x.row(sv[k]);
    coef_(static_cast<Eigen::Index>(k)) = y[static_cast<std::size_t>(sv[k])] * alpha[static_cast<std::size_t>(sv[k])];
  }
}

double KernelSvm::decision(const RowVector& x) const {
  if (constant_ >= 0) return constant_ == 1 ? 1.0 : -1.0;
  double sum = 0;
  for (Eigen::Index k = 0; k < support_.rows(); ++k) sum += coef_(k) * kernel(support_.row(k), x);
  return sum - rho_;
}

void KernelSvm::write(BlobWriter& w) const {
  w.f64(gamma_);
  w.f64(rho_);
  w.f64(static_cast<double>(constant_));
  w.u64(static_cast<std::uint64_t>(support_.rows()));
  w.u64(static_cast<std::uint64_t>(support_.cols()));
  w.doubles(support_.data(), static_cast<std::size_t>(support_.size()));
  w.doubles(coef_.data(), static_cast<std::size_t>(coef_.size()));
}

void KernelSvm::read(BlobReader& r) {
  gamma_ = r.f64();
  rho_ = r.f64();
  constant_ = static_cast<int>(r.f64());
  const auto rows = static_cast<Eigen::Index>(r.u64());
  const auto cols = static_cast<Eigen::Index>(r.u64());
  support_.resize(rows, cols);
  coef_.resize(rows);
  r.doubles(support_.data(), static_cast<std::size_t>(support_.size()));
  r.doubles(coef_.data(), static_cast<std::size_t>(coef_.size()));
}

SvmClassifier::SvmClassifier(SvmConfig config, const featurize::FeatureContext& context)
    : config_(config), svm_(config) {
  if (!context.words) throw ModelError("the SVM needs a word vocabulary");
  words_ = context.words->initial_table(0);
}

RowVector SvmClassifier::vector_of(const FeaturizedSentence& s, std::size_t t) const {
  auto it = s.tokens[t].indices.find(featurize::FeatureKind::W);
  if (it == s.tokens[t].indices.end()) throw ModelError("sentence \"" + s.id + "\" lacks feature W");
  const int row = it->second >= 0 && it->second < words_.rows() ? it->second : featurize::Vocabulary::kUnknown;
  return words_.row(row);
}

void SvmClassifier::fit_once(std::span<const FeaturizedSentence> train) {
  std::size_t n = 0;
  for (const auto& s : train) n += s.size();
  RowMatrix x(static_cast<Eigen::Index>(n), words_.cols());
  std::vector<int> labels;
  labels.reserve(n);
  Eigen::Index r = 0;
  for (const auto& s : train) {
    for (std::size_t t = 0; t < s.size(); ++t) {
      x.row(r++) = vector_of(s, t);
      labels.push_back(s.labels[t]);
    }
  }
  svm_.fit(x, labels);
}

std::vector<double> SvmClassifier::predict_proba(const FeaturizedSentence& sentence) const {
  std::vector<double> out(sentence.size());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = svm_.predict(vector_of(sentence, t));
  return out;
}

std::string SvmClassifier::serialize() const {
  BlobWriter w;
  w.u64(static_cast<std::uint64_t>(words_.rows()));
  w.u64(static_cast<std::uint64_t>(words_.cols()));
  w.doubles(words_.data(), static_cast<std::size_t>(words_.size()));
  svm_.write(w);
  return w.take();
}

void SvmClassifier::deserialize(std::string_view blob) {
  BlobReader r(blob);
  const auto rows = static_cast<Eigen::Index>(r.u64());
  const auto cols = static_cast<Eigen::Index>(r.u64());
  words_.resize(rows, cols);
  r.doubles(words_.data(), static_cast<std::size_t>(words_.size()));
  svm_.read(r);
  if (!r.done()) throw ModelError("trailing bytes in SVM checkpoint");
}

std::string SvmClassifier::config_json() const { return to_json(ModelConfig(config_)); }

}  // namespace oed::models
