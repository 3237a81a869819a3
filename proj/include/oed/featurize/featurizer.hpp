#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oed/corpus/dataset.hpp"
#include "oed/featurize/cache.hpp"
#include "oed/featurize/encoder.hpp"
#include "oed/featurize/feature_kind.hpp"
#include "oed/featurize/vocabulary.hpp"

namespace oed::featurize {

/// Features of one token: dense frozen vectors (B, S, Sp) and table indices
/// for trainable kinds (W, P, T, D, E). Po stores the token's position in the
/// sentence; window models turn it into a relative offset.
struct FeatureBundle {
  std::map<FeatureKind, std::vector<float>> vectors;
  std::map<FeatureKind, int> indices;

  friend bool operator==(const FeatureBundle&, const FeatureBundle&) = default;
};

struct FeaturizedSentence {
  std::string id;
  FeatureSet kinds;
  std::vector<FeatureBundle> tokens;
  std::vector<int> labels;

  std::size_t size() const { return tokens.size(); }
  friend bool operator==(const FeaturizedSentence&, const FeaturizedSentence&) = default;
};

/// Vocabularies shared by all trials of an experiment.
struct FeatureContext {
  std::map<FeatureKind, TagVocabulary> tag_vocabs;
  std::optional<WordEmbeddings> words;

  std::size_t table_rows(FeatureKind kind) const;
};

/// Builds tag vocabularies for P/T/D/E and the word vocabulary over `datasets`.
FeatureContext build_context(std::span<const corpus::Dataset* const> datasets,
                             const StaticEmbeddings* pretrained = nullptr);

/// Encoders per frozen kind: B (768-d) and Sp (96-d). S is derived from B.
using ProviderRegistry = std::map<FeatureKind, std::shared_ptr<const ContextualEncoder>>;

class Featurizer {
 public:
  Featurizer(FeatureContext context, ProviderRegistry providers,
             std::shared_ptr<FeatureCache> cache = nullptr);

  const FeatureContext& context() const { return context_; }
  const ProviderRegistry& providers() const { return providers_; }

  /// One bundle per token holding every kind in `kinds`. Throws FeatureError
  /// when a provider is missing or returns the wrong number of rows.
  FeaturizedSentence featurize(const corpus::Sentence& sentence, FeatureSet kinds) const;
  std::vector<FeaturizedSentence> featurize(const corpus::Dataset& dataset, FeatureSet kinds) const;

  /// Encoder output for one frozen kind, via the cache when configured.
  TokenMatrix frozen(const corpus::Sentence& sentence, FeatureKind kind) const;

 private:
  FeatureContext context_;
  ProviderRegistry providers_;
  std::shared_ptr<FeatureCache> cache_;
};

}  // namespace oed::featurize
