#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "oed/featurize/feature_kind.hpp"

namespace oed::models {

using featurize::FeatureSet;

/// Stacked Bi-LSTM. hidden_units lists the units of each layer, bottom first
/// (written <100,15,5>).
struct RnnConfig {
  std::vector<int> hidden_units{15};
  std::string features = "all";
  double dropout = 0.1;
  double l1 = 0.001;
  double l2 = 0.001;
  double learning_rate = 0.001;
  int batch_size = 32;

  FeatureSet feature_set() const;
  /// Throws UsageError on empty/non-positive hidden units or a Po feature.
  void validate() const;
  friend bool operator==(const RnnConfig&, const RnnConfig&) = default;
};

/// Window CNN: word (+entity) (+relative position) embeddings per window
/// slot, convolutions of several widths, max-pooling over time, dropout,
/// sigmoid output.
struct CnnConfig {
  int window = 5;
  int filters_per_size = 150;
  std::vector<int> filter_sizes{2, 3, 4, 5};
  double dropout = 0.5;
  double norm_cap = 3.0;
  int batch_size = 50;
  int word_dim = 300;
  int entity_dim = 50;
  int position_dim = 50;
  bool use_entity = true;
  bool use_position = true;
  double learning_rate = 0.001;

  /// Defaults for a window size: filter widths wider than the window are
  /// dropped (width 1 remains for window 1) and window 1 has no positions.
  static CnnConfig for_window(int window, bool use_entity = true);

  int token_width() const;
  int total_filters() const;
  FeatureSet feature_set() const;
  /// Applies a "{W,E,Po}"-style expression to the use_* flags; W is required.
  void set_features(FeatureSet features);
  /// Throws UsageError when an invariant is broken (even window, filter
  /// wider than the window, positions on window 1, ...).
  void validate() const;
  friend bool operator==(const CnnConfig&, const CnnConfig&) = default;
};

enum class SvmKernel { kLinear, kPolynomial, kRbf, kSigmoid };

std::string to_string(SvmKernel k);
SvmKernel svm_kernel_from_string(const std::string& name);

/// Kernel SVM on the W vector of a single token. Remaining hyperparameters
/// follow the common library defaults (C = 1, gamma = 1 / (d * Var(X)),
/// degree 3, coef0 0, tolerance 1e-3).
struct SvmConfig {
  SvmKernel kernel = SvmKernel::kRbf;
  double c = 1.0;
  int degree = 3;
  double coef0 = 0.0;
  double tolerance = 1e-3;
  std::size_t cache_mb = 200;

  FeatureSet feature_set() const { return {featurize::FeatureKind::W}; }
  friend bool operator==(const SvmConfig&, const SvmConfig&) = default;
};

/// Parses "<100,15,5>", "⟨100,15,5⟩", "100,15,5" or "15" into layer sizes.
std::vector<int> parse_architecture(const std::string& text);

using ModelConfig = std::variant<RnnConfig, CnnConfig, SvmConfig>;

std::string family(const ModelConfig& config);
FeatureSet feature_set(const ModelConfig& config);
void validate(const ModelConfig& config);

/// Compact label such as "rnn <15> all" or "cnn w11 {W,E,Po}".
std::string describe(const ModelConfig& config);

/// JSON object text with a "family" key; parse_model_config inverts it.
std::string to_json(const ModelConfig& config);
ModelConfig parse_model_config(const std::string& json_text);

}  // namespace oed::models
