#include "oed/annotator/retrain.hpp"

#include "oed/trainer/trial.hpp"

namespace oed::annotator {

using featurize::FeatureKind;

ClassifierSuggestions::ClassifierSuggestions(std::shared_ptr<const featurize::Featurizer> featurizer,
                                             std::unique_ptr<models::TokenClassifier> classifier)
    : featurizer_(std::move(featurizer)), classifier_(std::move(classifier)) {}

std::vector<double> ClassifierSuggestions::suggest(const corpus::Sentence& sentence) const {
  return classifier_->predict_proba(featurizer_->featurize(sentence, classifier_->features()));
}

Retrainer make_rnn_retrainer(const corpus::Dataset& universe, RnnRetrainOptions options) {
  options.rnn.validate();
  const auto kinds = options.rnn.feature_set();
  const corpus::Dataset* parts[] = {&universe};
  auto context = featurize::build_context(parts);
  auto providers = options.providers;
  if ((kinds.contains(FeatureKind::B) || kinds.contains(FeatureKind::S)) && !providers.count(FeatureKind::B)) {
    providers[FeatureKind::B] = featurize::make_encoder({}, featurize::dim(FeatureKind::B));
  }
  if (kinds.contains(FeatureKind::Sp) && !providers.count(FeatureKind::Sp)) {
    providers[FeatureKind::Sp] = featurize::make_encoder({}, featurize::dim(FeatureKind::Sp));
  }
  auto featurizer = std::make_shared<const featurize::Featurizer>(std::move(context), std::move(providers));

  return [featurizer, options, kinds](const RetrainRequest& request) -> std::shared_ptr<const SuggestionModel> {
    if (request.pool.size() < 2) throw Error("retraining needs at least two labeled sentences");
    trainer::FeatureStore store;
    store.context = featurizer->context();
    store.kinds = kinds;
    for (const auto& s : request.pool) store.trainval.push_back(featurizer->featurize(s, kinds));

    trainer::TrialConfig cfg;
    cfg.variant_id = "session";
    cfg.model = options.rnn;
    cfg.seed = request.seed;
    cfg.validation_fraction = options.validation_fraction;
    cfg.stop = options.stop;
    auto outcome = trainer::run_trial(cfg, store);
    return std::make_shared<ClassifierSuggestions>(featurizer, std::move(outcome.model));
  };
}

}  // namespace oed::annotator
