#include "oed/featurize/featurizer.hpp"

namespace oed::featurize {

std::size_t FeatureContext::table_rows(FeatureKind kind) const {
  if (kind == FeatureKind::W) {
    if (!words) throw FeatureError("no word vocabulary in the feature context");
    return words->vocab.size();
  }
  auto it = tag_vocabs.find(kind);
  if (it == tag_vocabs.end()) {
    throw FeatureError("no vocabulary for feature kind " + std::string(to_string(kind)));
  }
  return it->second.size();
}

FeatureContext build_context(std::span<const corpus::Dataset* const> datasets,
                             const StaticEmbeddings* pretrained) {
  FeatureContext ctx;
  for (auto kind : {FeatureKind::P, FeatureKind::T, FeatureKind::D, FeatureKind::E}) {
    ctx.tag_vocabs.emplace(kind, build_tag_vocab(datasets, kind));
  }
  ctx.words = build_word_embeddings(datasets, pretrained);
  return ctx;
}

Featurizer::Featurizer(FeatureContext context, ProviderRegistry providers,
                       std::shared_ptr<FeatureCache> cache)
    : context_(std::move(context)), providers_(std::move(providers)), cache_(std::move(cache)) {
  for (const auto& [kind, encoder] : providers_) {
    if (kind != FeatureKind::B && kind != FeatureKind::Sp) {
      throw FeatureError("providers can only be registered for B and Sp");
    }
    if (!encoder) throw FeatureError("null provider for " + std::string(to_string(kind)));
    if (encoder->dim() != dim(kind)) {
      throw FeatureError("provider " + encoder->name() + " has dimension " + std::to_string(encoder->dim()) +
                         ", expected " + std::to_string(dim(kind)) + " for " + std::string(to_string(kind)));
    }
  }
}

TokenMatrix Featurizer::frozen(const corpus::Sentence& sentence, FeatureKind kind) const {
  auto it = providers_.find(kind);
  if (it == providers_.end()) {
    throw FeatureError("no provider registered for feature kind " + std::string(to_string(kind)));
  }
  const auto& encoder = *it->second;
  if (cache_) {
    if (auto hit = cache_->load(encoder.name(), sentence.id, sentence.size(), encoder.dim())) return *hit;
  }
  TokenMatrix m = encoder.encode(sentence);
  if (static_cast<std::size_t>(m.rows()) != sentence.size()) {
    throw FeatureError("provider " + encoder.name() + " returned " + std::to_string(m.rows()) +
                       " vectors for a sentence of " + std::to_string(sentence.size()) + " tokens");
  }
  if (static_cast<std::size_t>(m.cols()) != encoder.dim()) {
    throw FeatureError("provider " + encoder.name() + " returned vectors of the wrong dimension");
  }
  if (cache_) cache_->store(encoder.name(), sentence.id, m);
  return m;
}

FeaturizedSentence Featurizer::featurize(const corpus::Sentence& sentence, FeatureSet kinds) const {
  FeaturizedSentence out;
  out.id = sentence.id;
  out.kinds = kinds;
  out.labels = sentence.labels();
  out.tokens.resize(sentence.size());

  auto row_vector = [](const TokenMatrix& m, Eigen::Index r) {
    return std::vector<float>(m.row(r).data(), m.row(r).data() + m.cols());
  };

  if (kinds.contains(FeatureKind::B) || kinds.contains(FeatureKind::S)) {
    const TokenMatrix b = frozen(sentence, FeatureKind::B);
    std::vector<float> s;
    if (kinds.contains(FeatureKind::S)) s = sentence_embedding(b);
    for (std::size_t t = 0; t < sentence.size(); ++t) {
      if (kinds.contains(FeatureKind::B)) out.tokens[t].vectors[FeatureKind::B] = row_vector(b, static_cast<Eigen::Index>(t));
      if (kinds.contains(FeatureKind::S)) out.tokens[t].vectors[FeatureKind::S] = s;
    }
  }
  if (kinds.contains(FeatureKind::Sp)) {
    const TokenMatrix sp = frozen(sentence, FeatureKind::Sp);
    for (std::size_t t = 0; t < sentence.size(); ++t) {
      out.tokens[t].vectors[FeatureKind::Sp] = row_vector(sp, static_cast<Eigen::Index>(t));
    }
  }
  for (auto kind : kinds.kinds()) {
    if (is_categorical(kind)) {
      auto it = context_.tag_vocabs.find(kind);
      if (it == context_.tag_vocabs.end()) {
        throw FeatureError("no vocabulary for feature kind " + std::string(to_string(kind)));
      }
      for (std::size_t t = 0; t < sentence.size(); ++t) {
        out.tokens[t].indices[kind] = it->second.index(tag_of(sentence.tokens[t], kind));
      }
    } else if (kind == FeatureKind::W) {
      if (!context_.words) throw FeatureError("no word vocabulary in the feature context");
      for (std::size_t t = 0; t < sentence.size(); ++t) {
        out.tokens[t].indices[kind] = context_.words->vocab.index(sentence.tokens[t].text);
      }
    } else if (kind == FeatureKind::Po) {
      for (std::size_t t = 0; t < sentence.size(); ++t) out.tokens[t].indices[kind] = static_cast<int>(t);
    }
  }
  return out;
}

std::vector<FeaturizedSentence> Featurizer::featurize(const corpus::Dataset& dataset, FeatureSet kinds) const {
  std::vector<FeaturizedSentence> out;
  out.reserve(dataset.size());
  for (const auto& s : dataset.sentences) out.push_back(featurize(s, kinds));
  return out;
}

}  // namespace oed::featurize
