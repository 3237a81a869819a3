#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "oed/models/classifier.hpp"
#include "oed/models/config.hpp"
#include "oed/models/nn.hpp"

namespace oed::models {

/// embeddings -> concat -> dropout -> stacked Bi-LSTM -> dense(1, sigmoid).
///
/// Trainable tables exist only for the categorical kinds and W in the feature
/// set; B, S and Sp enter the concatenation unchanged. Training minimises the
/// mean per-token binary cross-entropy of a batch plus an L1/L2 penalty on the
/// LSTM input and recurrent kernels, with Adam.
class BiLstmClassifier final : public TokenClassifier {
 public:
  BiLstmClassifier(RnnConfig config, const featurize::FeatureContext& context, std::uint64_t seed);

  std::string family() const override { return "rnn"; }
  FeatureSet features() const override { return features_; }
  std::vector<double> predict_proba(const FeaturizedSentence& sentence) const override;
  using TokenClassifier::predict_proba;
  double train_epoch(std::span<const FeaturizedSentence> train, Rng& rng) override;
  std::string serialize() const override;
  void deserialize(std::string_view blob) override;
  std::string config_json() const override;

  const RnnConfig& config() const { return config_; }
  std::size_t input_width() const { return input_width_; }
  std::size_t layer_count() const { return layers_.size(); }
  /// Units per layer, bottom first.
  std::vector<int> layer_units() const;

  /// Loss of `batch` with gradients written into the parameters (previous
  /// gradients are cleared). Dropout is applied only when `dropout_rng` is set.
  double loss_and_gradient(std::span<const FeaturizedSentence> batch, Rng* dropout_rng);
  /// Same loss without touching gradients or applying dropout.
  double loss(std::span<const FeaturizedSentence> batch) const;

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  /// Embedding table of a trainable kind, or nullptr if the kind is unused.
  const Parameter* table(featurize::FeatureKind kind) const;

 private:
  struct Direction {
    Parameter w_input;   // 4h x in, gate order i, f, g, o
    Parameter w_hidden;  // 4h x h
    Parameter bias;      // 4h x 1
  };
  struct Layer {
    int units = 0;
    Direction forward;
    Direction backward;
  };
  struct Segment {
    featurize::FeatureKind kind;
    Eigen::Index offset;
    Eigen::Index width;
  };
  struct DirectionCache {
    RowMatrix i, f, g, o, c, tanh_c, h;
  };
  struct LayerCache {
    RowMatrix input;
    DirectionCache forward, backward;
  };
  struct Pass {
    RowMatrix dropout_mask;  // empty when no dropout
    std::vector<LayerCache> layers;
    RowMatrix top;           // T x 2h of the last layer
    Vector logits;
  };

  RowMatrix assemble(const FeaturizedSentence& s) const;
  void forward(const FeaturizedSentence& s, Rng* dropout_rng, Pass& pass) const;
  static void run_direction(const Direction& d, int units, const RowMatrix& in, bool reverse, DirectionCache& cache);
  static RowMatrix backprop_direction(Direction& d, int units, const RowMatrix& in, bool reverse,
                                      const DirectionCache& cache, const RowMatrix& d_out);
  void backward(const FeaturizedSentence& s, const Pass& pass, double scale);
  double penalty() const;
  void add_penalty_gradient();

  RnnConfig config_;
  FeatureSet features_;
  std::vector<Segment> segments_;
  std::size_t input_width_ = 0;
  std::map<featurize::FeatureKind, Parameter> tables_;
  std::vector<Layer> layers_;
  Parameter dense_w_;  // 1 x 2h
  Parameter dense_b_;  // 1 x 1
  Adam adam_;
};

}  // namespace oed::models
