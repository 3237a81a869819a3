#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "oed/models/classifier.hpp"
#include "oed/models/config.hpp"
#include "oed/models/nn.hpp"
#include "oed/models/windows.hpp"

namespace oed::models {

/// Window classifier: each token is classified from the embeddings of the
/// window around it. Per slot the word (+entity) (+relative position) vectors
/// are concatenated; convolutions of several widths run over the slots, each
/// feature map is max-pooled, and a dropout + dense sigmoid layer follows.
/// Embedding rows are renormalised to norm_cap after every update.
class WindowCnnClassifier final : public TokenClassifier {
 public:
  WindowCnnClassifier(CnnConfig config, const featurize::FeatureContext& context, std::uint64_t seed);

  std::string family() const override { return "cnn"; }
  FeatureSet features() const override { return config_.feature_set(); }
  std::vector<double> predict_proba(const FeaturizedSentence& sentence) const override;
  using TokenClassifier::predict_proba;
  double train_epoch(std::span<const FeaturizedSentence> train, Rng& rng) override;
  std::string serialize() const override;
  void deserialize(std::string_view blob) override;
  std::string config_json() const override;

  const CnnConfig& config() const { return config_; }
  std::size_t token_width() const { return static_cast<std::size_t>(config_.token_width()); }
  std::size_t feature_maps() const { return static_cast<std::size_t>(config_.total_filters()); }

  /// Probability for a single window of `sentence`.
  double predict_window(const FeaturizedSentence& sentence, const WindowInstance& window) const;

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  /// Embedding tables (word, entity, position) present in this model.
  std::vector<const Parameter*> embedding_tables() const;

 private:
  struct WindowRef {
    const FeaturizedSentence* sentence;
    WindowInstance window;
  };
  struct Conv {
    int width;
    Parameter kernel;  // (width * token_width) x filters
    Parameter bias;    // 1 x filters
  };
  struct ConvCache {
    RowMatrix columns;  // (B * positions) x (width * token_width)
    RowMatrix act;      // (B * positions) x filters, after tanh
    std::vector<Eigen::Index> argmax;  // B * filters
  };
  struct Pass {
    RowMatrix x;  // (B * window) x token_width
    std::vector<ConvCache> convs;
    RowMatrix pooled;  // B x total filters
    RowMatrix mask;    // dropout mask, empty when off
    Vector logits;
  };

  struct Rows {
    int word, entity, position;
  };
  Rows rows_for(const FeaturizedSentence& s, long column, int slot) const;
  void forward(std::span<const WindowRef> batch, Rng* dropout_rng, Pass& pass) const;
  double step(std::span<const WindowRef> batch, Rng& rng);
  void apply_norm_cap();

  CnnConfig config_;
  Parameter words_;
  Parameter entities_;
  Parameter positions_;
  std::vector<Conv> convs_;
  Parameter dense_w_;  // 1 x total filters
  Parameter dense_b_;
  Adam adam_;
};

}  // namespace oed::models
