#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "oed/models/classifier.hpp"
#include "oed/models/config.hpp"
#include "oed/models/nn.hpp"

namespace oed::models {

/// C-support vector classifier trained with sequential minimal optimisation
/// (second-order working-set selection, no shrinking).
class KernelSvm {
 public:
  explicit KernelSvm(SvmConfig config = {});

  /// `x` holds one sample per row; labels are 0/1. gamma is set to
  /// 1 / (d * Var(x)) over all entries of x.
  void fit(const RowMatrix& x, std::span<const int> labels);
  double decision(const RowVector& x) const;
  int predict(const RowVector& x) const { return decision(x) > 0 ? 1 : 0; }

  double gamma() const { return gamma_; }
  double rho() const { return rho_; }
  std::size_t support_count() const { return static_cast<std::size_t>(support_.rows()); }
  long iterations() const { return iterations_; }

  void write(BlobWriter& w) const;
  void read(BlobReader& r);

 private:
  double kernel(const RowVector& a, const RowVector& b) const;

  SvmConfig config_;
  double gamma_ = 1.0;
  double rho_ = 0.0;
  RowMatrix support_;
  Vector coef_;  // y_i * alpha_i
  int constant_ = -1;  // set when training saw one class only
  long iterations_ = 0;
};

/// Token classifier over the static word vector of each token alone.
class SvmClassifier final : public TokenClassifier {
 public:
  /// The word table is built once with seed 0; training ignores seeds.
  SvmClassifier(SvmConfig config, const featurize::FeatureContext& context);

  std::string family() const override { return "svm"; }
  FeatureSet features() const override { return config_.feature_set(); }
  std::vector<double> predict_proba(const FeaturizedSentence& sentence) const override;
  using TokenClassifier::predict_proba;
  bool iterative() const override { return false; }
  void fit_once(std::span<const FeaturizedSentence> train) override;
  std::string serialize() const override;
  void deserialize(std::string_view blob) override;
  std::string config_json() const override;

  const KernelSvm& machine() const { return svm_; }

 private:
  RowVector vector_of(const FeaturizedSentence& s, std::size_t t) const;

  SvmConfig config_;
  Matrix words_;
  KernelSvm svm_;
};

}  // namespace oed::models
