#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>

#include "oed/featurize/featurizer.hpp"
#include "oed/models/classifier.hpp"
#include "oed/models/config.hpp"

namespace oed::models {

/// Builds an untrained classifier. Throws UsageError on an invalid config.
std::unique_ptr<TokenClassifier> make_classifier(const ModelConfig& config, const featurize::FeatureContext& context,
                                                 std::uint64_t seed);

struct Checkpoint {
  ModelConfig config;
  featurize::FeatureContext context;
  std::unique_ptr<TokenClassifier> classifier;
};

/// Writes config.json, weights.bin and one vocabulary file per table kind.
void save_checkpoint(const std::filesystem::path& dir, const ModelConfig& config, const TokenClassifier& classifier,
                     const featurize::FeatureContext& context);
/// Restores a fitted classifier from save_checkpoint output.
Checkpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace oed::models
