#include "oed/featurize/vocabulary.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "oed/common/rng.hpp"

namespace oed::featurize {

Vocabulary::Vocabulary(std::vector<std::string> entries) : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end());
  entries_.erase(std::unique(entries_.begin(), entries_.end()), entries_.end());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    index_.emplace(entries_[i], static_cast<int>(i + kReserved));
  }
}

int Vocabulary::index(const std::string& key) const {
  auto it = index_.find(key);
  return it == index_.end() ? kUnknown : it->second;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write vocabulary " + path.string());
  for (const auto& e : entries_) out << e << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read vocabulary " + path.string());
  std::vector<std::string> entries;
  std::string line;
  while (std::getline(in, line)) entries.push_back(line);
  return Vocabulary(std::move(entries));
}

const std::string& tag_of(const corpus::Token& token, FeatureKind kind) {
  switch (kind) {
    case FeatureKind::P: return token.pos_simple;
    case FeatureKind::T: return token.pos_detailed;
    case FeatureKind::D: return token.dep_rel;
    case FeatureKind::E: return token.entity_tag;
    default: break;
  }
  throw UsageError("feature kind " + std::string(to_string(kind)) + " is not categorical");
}

TagVocabulary build_tag_vocab(std::span<const corpus::Dataset* const> datasets, FeatureKind kind) {
  if (!is_categorical(kind)) {
    throw UsageError("feature kind " + std::string(to_string(kind)) + " is not categorical");
  }
  std::set<std::string> tags;
  for (const auto* d : datasets) {
    for (const auto& s : d->sentences) {
      for (const auto& t : s.tokens) tags.insert(tag_of(t, kind));
    }
  }
  return {kind, Vocabulary({tags.begin(), tags.end()})};
}

TagVocabulary build_tag_vocab(const corpus::Dataset& dataset, FeatureKind kind) {
  const corpus::Dataset* one[] = {&dataset};
  return build_tag_vocab(one, kind);
}

Vocabulary build_word_vocab(std::span<const corpus::Dataset* const> datasets) {
  std::set<std::string> words;
  for (const auto* d : datasets) {
    for (const auto& s : d->sentences) {
      for (const auto& t : s.tokens) words.insert(t.text);
    }
  }
  return Vocabulary({words.begin(), words.end()});
}

StaticEmbeddings StaticEmbeddings::load_text(const std::filesystem::path& path, std::size_t expected_dim) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embedding file " + path.string());
  StaticEmbeddings out;
  out.dim_ = expected_dim;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    std::istringstream fields(line);
    std::string word;
    if (!(fields >> word)) continue;
    std::vector<float> v;
    v.reserve(expected_dim);
    float x;
    while (fields >> x) v.push_back(x);
    if (line_number == 1 && v.size() == 1) continue;  // word2vec "<count> <dim>" header
    if (v.size() != expected_dim) {
      throw Error("embedding file " + path.string() + " line " + std::to_string(line_number) +
                  ": expected " + std::to_string(expected_dim) + " values, got " +
                  std::to_string(v.size()));
    }
    out.vectors_.emplace(std::move(word), std::move(v));
  }
  return out;
}

const std::vector<float>* StaticEmbeddings::find(const std::string& word) const {
  auto it = vectors_.find(word);
  return it == vectors_.end() ? nullptr : &it->second;
}

void StaticEmbeddings::insert(std::string word, std::vector<float> vector) {
  if (vector.size() != dim_) throw Error("static embedding has wrong dimension");
  vectors_[std::move(word)] = std::move(vector);
}

Eigen::MatrixXd WordEmbeddings::initial_table(std::uint64_t seed) const {
  Rng rng = Rng(seed).derive(0x574f5244);  // "WORD"
  Eigen::MatrixXd table(static_cast<Eigen::Index>(vocab.size()), static_cast<Eigen::Index>(dim));
  for (Eigen::Index r = 0; r < table.rows(); ++r) {
    for (Eigen::Index c = 0; c < table.cols(); ++c) table(r, c) = rng.uniform(-0.25, 0.25);
  }
  table.row(Vocabulary::kPad).setZero();
  for (const auto& [row, values] : pretrained) {
    for (std::size_t c = 0; c < dim; ++c) table(row, static_cast<Eigen::Index>(c)) = values[c];
  }
  return table;
}

WordEmbeddings build_word_embeddings(std::span<const corpus::Dataset* const> datasets,
                                     const StaticEmbeddings* pretrained, std::size_t dim) {
  WordEmbeddings out;
  out.vocab = build_word_vocab(datasets);
  out.dim = pretrained ? pretrained->dim() : dim;
  if (pretrained) {
    for (const auto& word : out.vocab.entries()) {
      if (const auto* v = pretrained->find(word)) out.pretrained.emplace(out.vocab.index(word), *v);
    }
  }
  return out;
}

}  // namespace oed::featurize
