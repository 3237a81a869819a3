#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "oed/corpus/dataset.hpp"
#include "oed/featurize/feature_kind.hpp"

namespace oed::featurize {

/// String-to-index map with two reserved entries: 0 = padding, 1 = unknown.
/// Entries are sorted so that the mapping does not depend on corpus order.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnknown = 1;
  static constexpr std::size_t kReserved = 2;

  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> entries);

  /// Index for `key`; unseen keys map to kUnknown.
  int index(const std::string& key) const;
  bool contains(const std::string& key) const { return index_.count(key) > 0; }

  /// Total rows including the reserved ones.
  std::size_t size() const { return entries_.size() + kReserved; }
  /// Distinct entries, reserved rows excluded.
  std::size_t entry_count() const { return entries_.size(); }
  const std::vector<std::string>& entries() const { return entries_; }

  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.entries_ == b.entries_; }

 private:
  std::vector<std::string> entries_;
  std::unordered_map<std::string, int> index_;
};

struct TagVocabulary {
  FeatureKind kind = FeatureKind::P;
  Vocabulary vocab;

  int index(const std::string& tag) const { return vocab.index(tag); }
  std::size_t size() const { return vocab.size(); }
};

/// The tag column that feeds a categorical kind.
const std::string& tag_of(const corpus::Token& token, FeatureKind kind);

/// One entry per distinct tag in `datasets`. Throws UsageError for
/// non-categorical kinds.
TagVocabulary build_tag_vocab(std::span<const corpus::Dataset* const> datasets, FeatureKind kind);
TagVocabulary build_tag_vocab(const corpus::Dataset& dataset, FeatureKind kind);

Vocabulary build_word_vocab(std::span<const corpus::Dataset* const> datasets);

/// Pretrained static vectors in the usual text format: a token followed by
/// its floats on each line. An optional "<count> <dim>" header is skipped.
class StaticEmbeddings {
 public:
  static StaticEmbeddings load_text(const std::filesystem::path& path, std::size_t expected_dim = 300);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }
  const std::vector<float>* find(const std::string& word) const;
  void insert(std::string word, std::vector<float> vector);

 private:
  std::size_t dim_ = 300;
  std::unordered_map<std::string, std::vector<float>> vectors_;
};

/// Word vocabulary plus the pretrained rows available for it.
struct WordEmbeddings {
  Vocabulary vocab;
  std::size_t dim = 300;
  /// Pretrained vectors by vocabulary index (missing rows are out-of-vocabulary).
  std::unordered_map<int, std::vector<float>> pretrained;

  /// Initial trainable table: padding row zero, pretrained rows copied,
  /// everything else drawn from U(-0.25, 0.25) with `seed`.
  Eigen::MatrixXd initial_table(std::uint64_t seed) const;
};

WordEmbeddings build_word_embeddings(std::span<const corpus::Dataset* const> datasets,
                                     const StaticEmbeddings* pretrained, std::size_t dim = 300);

}  // namespace oed::featurize
