#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oed/common/error.hpp"
#include "oed/common/rng.hpp"
#include "oed/evalstats/metrics.hpp"
#include "oed/featurize/featurizer.hpp"

namespace oed::models {

using featurize::FeatureSet;
using featurize::FeaturizedSentence;

class ModelError : public Error {
 public:
  using Error::Error;
};

/// Non-finite loss during training.
class DivergenceError : public ModelError {
 public:
  using ModelError::ModelError;
};

struct StopPolicy {
  int patience = 400;
  int max_epochs = 5000;
  /// A score counts as an improvement only if it beats the best by more than this.
  double min_delta = 1e-6;
};

/// Patience bookkeeping. Training stops once more than `patience` epochs have
/// passed since the best one, or at max_epochs.
class EarlyStopping {
 public:
  explicit EarlyStopping(StopPolicy policy);

  /// Records the score of `epoch`; true if it becomes the new best.
  bool observe(int epoch, double score);
  bool should_stop() const;

  int best_epoch() const { return best_epoch_; }
  double best_score() const { return best_score_; }
  int last_epoch() const { return last_epoch_; }

 private:
  StopPolicy policy_;
  int best_epoch_ = 0;
  double best_score_;
  int last_epoch_ = 0;
};

struct StopOutcome {
  int stopped_epoch = 0;
  int best_epoch = 0;
  double best_score = 0;
};

/// Runs `epoch_step(epoch)` for epoch = 1, 2, ... where the step returns the
/// monitored score; `on_improvement(epoch)` fires whenever a new best is seen.
StopOutcome run_with_early_stopping(const StopPolicy& policy, const std::function<double(int)>& epoch_step,
                                    const std::function<void(int)>& on_improvement = {});

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0;
  double validation_score = 0;
};

struct TrainingTrace {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  int stopped_epoch = 0;
  double best_validation_score = 0;
};

/// Per-token binary classifier over featurized sentences.
class TokenClassifier {
 public:
  virtual ~TokenClassifier() = default;

  virtual std::string family() const = 0;
  /// Feature kinds the model reads from each bundle.
  virtual FeatureSet features() const = 0;

  /// One probability in [0, 1] per token.
  virtual std::vector<double> predict_proba(const FeaturizedSentence& sentence) const = 0;
  std::vector<std::vector<double>> predict_proba(std::span<const FeaturizedSentence> batch) const;

  /// Epoch-based models train with early stopping; others fit in one call.
  virtual bool iterative() const { return true; }
  /// One pass over `train` in an order drawn from `rng`; returns the mean loss.
  virtual double train_epoch(std::span<const FeaturizedSentence> train, Rng& rng);
  /// Single-shot training for non-iterative models.
  virtual void fit_once(std::span<const FeaturizedSentence> train);

  /// Trains with early stopping on the validation score and leaves the model
  /// at its best epoch. Non-iterative models fit once on train + validation.
  TrainingTrace fit(std::span<const FeaturizedSentence> train, std::span<const FeaturizedSentence> validation,
                    const StopPolicy& policy, Rng& rng,
                    evalstats::F1Kind monitor = evalstats::F1Kind::kStandard);

  /// Parameter snapshot; restoring it reproduces predictions exactly.
  virtual std::string serialize() const = 0;
  virtual void deserialize(std::string_view blob) = 0;
  /// Model hyperparameters as a JSON object string.
  virtual std::string config_json() const = 0;

  bool fitted() const { return fitted_; }
  void mark_fitted() { fitted_ = true; }

 private:
  bool fitted_ = false;
};

/// Validation-style score of a classifier on a set of sentences.
evalstats::ConfusionCounts evaluate(const TokenClassifier& c, std::span<const FeaturizedSentence> data,
                                    double threshold = 0.5);

/// Labels with p >= threshold marked as triggers. Throws ModelError if the
/// classifier has not been fitted.
std::vector<int> predict_sentence(const TokenClassifier& c, const FeaturizedSentence& s, double threshold = 0.5);

}  // namespace oed::models
