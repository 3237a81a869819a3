#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "oed/corpus/dataset.hpp"
#include "oed/evalstats/metrics.hpp"
#include "oed/featurize/featurizer.hpp"
#include "oed/models/classifier.hpp"
#include "oed/models/config.hpp"

namespace oed::trainer {

/// Featurized trainval and test partitions plus the shared vocabularies.
/// Built once per experiment and read by every trial.
struct FeatureStore {
  featurize::FeatureContext context;
  featurize::FeatureSet kinds;
  std::vector<featurize::FeaturizedSentence> trainval;
  std::vector<featurize::FeaturizedSentence> test;
};

FeatureStore build_feature_store(const corpus::Corpus& corpus, const featurize::Featurizer& featurizer,
                                 featurize::FeatureSet kinds);

struct TrialConfig {
  std::string variant_id = "v1";
  std::size_t variant_index = 0;
  models::ModelConfig model;
  std::uint64_t seed = 1;
  double validation_fraction = 0.2;
  /// Use split_seed for every trial instead of drawing the split from `seed`.
  bool fixed_split = false;
  std::uint64_t split_seed = 1;
  models::StopPolicy stop;
  evalstats::F1Kind monitor = evalstats::F1Kind::kStandard;
  /// Records carry no wall-clock time so that reruns are bit-identical.
  bool deterministic = true;
};

enum class TrialStatus { kOk, kFailed };

struct TrialResult {
  std::string variant_id;
  std::size_t variant_index = 0;
  std::string variant_label;
  std::string family;
  std::string features;
  std::uint64_t seed = 0;
  TrialStatus status = TrialStatus::kOk;
  std::string error;
  int best_epoch = 0;
  int stopped_epoch = 0;
  double best_validation_f1 = 0;
  std::string monitor = "std";
  evalstats::ConfusionCounts train;
  evalstats::ConfusionCounts validation;
  evalstats::ConfusionCounts test;
  double wall_seconds = 0;

  bool ok() const { return status == TrialStatus::kOk; }
  friend bool operator==(const TrialResult&, const TrialResult&) = default;
};

/// Canonical JSON record (stable key order, fixed float formatting).
std::string to_json(const TrialResult& r);
TrialResult trial_result_from_json(const std::string& text);
/// Checks the count invariants of a parsed record; throws Error.
void check_result(const TrialResult& r, const FeatureStore* store = nullptr);

struct TrialOutcome {
  TrialResult result;
  models::TrainingTrace trace;
  std::unique_ptr<models::TokenClassifier> model;
};

using ClassifierFactory = std::function<std::unique_ptr<models::TokenClassifier>(
    const models::ModelConfig&, const featurize::FeatureContext&, std::uint64_t seed)>;

/// Splits trainval by the trial seed, trains with early stopping and scores
/// the best checkpoint on train, validation and test. Initialisation,
/// shuffling and dropout all derive from the seed. Training errors
/// (including divergence) propagate.
TrialOutcome run_trial(const TrialConfig& cfg, const FeatureStore& store, const ClassifierFactory& factory = {});

}  // namespace oed::trainer
