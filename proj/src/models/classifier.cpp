#include "oed/models/classifier.hpp"

#include <cmath>
#include <limits>

namespace oed::models {

EarlyStopping::EarlyStopping(StopPolicy policy)
    : policy_(policy), best_score_(-std::numeric_limits<double>::infinity()) {
  if (policy_.patience < 1) throw UsageError("patience must be at least 1");
  if (policy_.max_epochs < 1) throw UsageError("max_epochs must be at least 1");
}

bool EarlyStopping::observe(int epoch, double score) {
  last_epoch_ = epoch;
  if (best_epoch_ == 0 || score > best_score_ + policy_.min_delta) {
    best_score_ = score;
    best_epoch_ = epoch;
    return true;
  }
  return false;
}

bool EarlyStopping::should_stop() const {
  return last_epoch_ >= policy_.max_epochs || last_epoch_ - best_epoch_ > policy_.patience;
}

StopOutcome run_with_early_stopping(const StopPolicy& policy, const std::function<double(int)>& epoch_step,
                                    const std::function<void(int)>& on_improvement) {
  EarlyStopping stopper(policy);
  for (int epoch = 1;; ++epoch) {
    const double score = epoch_step(epoch);
    if (stopper.observe(epoch, score) && on_improvement) on_improvement(epoch);
    if (stopper.should_stop()) break;
  }
  return {stopper.last_epoch(), stopper.best_epoch(), stopper.best_score()};
}

std::vector<std::vector<double>> TokenClassifier::predict_proba(std::span<const FeaturizedSentence> batch) const {
  std::vector<std::vector<double>> out;
  out.reserve(batch.size());
  for (const auto& s : batch) out.push_back(predict_proba(s));
  return out;
}

double TokenClassifier::train_epoch(std::span<const FeaturizedSentence>, Rng&) {
  throw ModelError(family() + " models are not trained epoch by epoch");
}

void TokenClassifier::fit_once(std::span<const FeaturizedSentence>) {
  throw ModelError(family() + " models are trained epoch by epoch");
}

evalstats::ConfusionCounts evaluate(const TokenClassifier& c, std::span<const FeaturizedSentence> data,
                                    double threshold) {
  evalstats::ConfusionCounts total;
  for (const auto& s : data) {
    const auto p = c.predict_proba(s);
    total += evalstats::confusion(p, s.labels, threshold);
  }
  return total;
}

TrainingTrace TokenClassifier::fit(std::span<const FeaturizedSentence> train,
                                   std::span<const FeaturizedSentence> validation, const StopPolicy& policy,
                                   Rng& rng, evalstats::F1Kind monitor) {
  TrainingTrace trace;
  if (!iterative()) {
    std::vector<FeaturizedSentence> all(train.begin(), train.end());
    all.insert(all.end(), validation.begin(), validation.end());
    fit_once(all);
    mark_fitted();
    return trace;
  }
  std::string best;
  double last_loss = 0;
  const auto outcome = run_with_early_stopping(
      policy,
      [&](int epoch) {
        last_loss = train_epoch(train, rng);
        if (!std::isfinite(last_loss)) {
          throw DivergenceError(family() + " training diverged at epoch " + std::to_string(epoch) +
                                " (loss is not finite)");
        }
        const double score = evalstats::metrics(evaluate(*this, validation)).f1(monitor);
        trace.epochs.push_back({epoch, last_loss, score});
        return score;
      },
      [&](int) { best = serialize(); });
  deserialize(best);
  mark_fitted();
  trace.best_epoch = outcome.best_epoch;
  trace.stopped_epoch = outcome.stopped_epoch;
  trace.best_validation_score = outcome.best_score;
  return trace;
}

std::vector<int> predict_sentence(const TokenClassifier& c, const FeaturizedSentence& s, double threshold) {
  if (!c.fitted()) throw ModelError("classifier has not been fitted");
  const auto p = c.predict_proba(s);
  std::vector<int> labels(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) labels[i] = p[i] >= threshold ? 1 : 0;
  return labels;
}

}  // namespace oed::models
