#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "oed/corpus/dataset.hpp"

namespace oed::featurize {

/// Fills the pos/tag/dep/ent columns of pre-tokenized sentences.
class TaggerProvider {
 public:
  virtual ~TaggerProvider() = default;
  virtual std::string name() const = 0;
  virtual void annotate(corpus::Sentence& sentence) const = 0;
};

/// Reads the tab-separated output of an external tagging pipeline:
///
///   # id = s1
///   # date = 1998-08-17
///   Russia<TAB>PROPN<TAB>NNP<TAB>nsubj<TAB>B-GPE[<TAB>label]
///
/// with a blank line after each sentence. The label column is optional (0/1).
/// Sentences without an "# id" line get "<file stem>-<n>".
corpus::Dataset read_tagged_columns(const std::filesystem::path& path,
                                    corpus::Partition partition = corpus::Partition::kTrainVal);

/// Tagger backed by a column file: annotates sentences by id, checking that
/// the token texts agree.
class ColumnFileTagger final : public TaggerProvider {
 public:
  explicit ColumnFileTagger(const std::filesystem::path& path);
  std::string name() const override { return name_; }
  void annotate(corpus::Sentence& sentence) const override;

 private:
  std::string name_;
  std::unordered_map<std::string, corpus::Sentence> tagged_;
};

}  // namespace oed::featurize
