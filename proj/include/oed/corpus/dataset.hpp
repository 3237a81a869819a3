#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "oed/common/error.hpp"

namespace oed::corpus {

/// Raised on schema violations. Carries the 1-based line number when the
/// problem is tied to one record of a JSONL file (0 otherwise).
class CorpusError : public Error {
 public:
  CorpusError(const std::string& message, std::size_t line = 0);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

enum class Label : int { kNonTrigger = 0, kTrigger = 1 };

struct Token {
  std::string text;
  Label label = Label::kNonTrigger;
  std::string pos_simple;    // "pos" column
  std::string pos_detailed;  // "tag" column
  std::string dep_rel;       // "dep" column
  std::string entity_tag = "O";

  bool is_trigger() const { return label == Label::kTrigger; }
  friend bool operator==(const Token&, const Token&) = default;
};

struct Sentence {
  std::string id;
  std::vector<Token> tokens;
  std::optional<std::string> source_date;  // YYYY-MM-DD

  std::size_t size() const { return tokens.size(); }
  std::vector<int> labels() const;
  friend bool operator==(const Sentence&, const Sentence&) = default;
};

enum class Partition { kTrainVal, kTest };

std::string_view to_string(Partition p);

struct Dataset {
  std::vector<Sentence> sentences;
  Partition partition = Partition::kTrainVal;

  std::size_t size() const { return sentences.size(); }
  bool empty() const { return sentences.empty(); }
  std::size_t token_count() const;
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// True for "O" and "B-<type>" / "I-<type>" with a non-empty type.
bool is_valid_entity_tag(std::string_view tag);

/// Checks the Token/Sentence/Dataset invariants; throws CorpusError.
void validate(const Dataset& dataset);

Sentence parse_sentence_line(std::string_view line, std::size_t line_number);
std::string sentence_to_json_line(const Sentence& sentence);

Dataset load_dataset(const std::filesystem::path& path,
                     Partition partition = Partition::kTrainVal);
Dataset parse_dataset(std::string_view jsonl, Partition partition = Partition::kTrainVal);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
std::string to_jsonl(const Dataset& dataset);

/// Paths from a partition manifest:
///   trainval: data/trainval.jsonl
///   test: data/test.jsonl
/// Relative paths resolve against the manifest's directory.
struct Manifest {
  std::filesystem::path trainval;
  std::filesystem::path test;
};

Manifest load_manifest(const std::filesystem::path& path);

struct Corpus {
  Dataset trainval;
  Dataset test;
};

/// Loads both partitions and checks that no id appears in both.
Corpus load_corpus(const Manifest& manifest);
void check_disjoint(const Dataset& a, const Dataset& b);

struct SplitSpec {
  std::uint64_t seed = 1;
  double validation_fraction = 0.2;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

/// Seeded uniform shuffle followed by a prefix split. The train part holds
/// ceil((1 - f) * N) sentences, validation the remainder.
SplitIndices split_indices(std::size_t n, const SplitSpec& spec);
std::pair<Dataset, Dataset> split(const Dataset& dataset, const SplitSpec& spec);

}  // namespace oed::corpus
