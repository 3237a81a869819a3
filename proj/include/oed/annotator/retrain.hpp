#pragma once

#include <memory>

#include "oed/annotator/session.hpp"
#include "oed/featurize/featurizer.hpp"
#include "oed/models/classifier.hpp"
#include "oed/models/config.hpp"

namespace oed::annotator {

struct RnnRetrainOptions {
  models::RnnConfig rnn;
  models::StopPolicy stop{20, 200, 1e-6};
  double validation_fraction = 0.2;
  /// Hashed-context encoders stand in for B and Sp unless providers are given.
  featurize::ProviderRegistry providers;
};

/// Serves probabilities from a trained classifier.
class ClassifierSuggestions final : public SuggestionModel {
 public:
  ClassifierSuggestions(std::shared_ptr<const featurize::Featurizer> featurizer,
                        std::unique_ptr<models::TokenClassifier> classifier);
  std::vector<double> suggest(const corpus::Sentence& sentence) const override;
  const models::TokenClassifier& classifier() const { return *classifier_; }

 private:
  std::shared_ptr<const featurize::Featurizer> featurizer_;
  std::unique_ptr<models::TokenClassifier> classifier_;
};

/// Retrainer that fits the Bi-LSTM on the whole labeled pool with early
/// stopping. Vocabularies cover `universe` (every sentence of the session),
/// so queued sentences are featurized with the same tables.
Retrainer make_rnn_retrainer(const corpus::Dataset& universe, RnnRetrainOptions options = {});

}  // namespace oed::annotator
