#pragma once

#include <cstddef>
#include <string>

#include "oed/corpus/dataset.hpp"

namespace oed::corpus {

struct DatasetStats {
  std::size_t sentence_count = 0;
  std::size_t token_count = 0;
  std::size_t word_count = 0;
  std::size_t entity_count = 0;
  std::size_t event_count = 0;

  double avg_tokens = 0;
  double avg_words = 0;
  double avg_entities = 0;
  double avg_events = 0;

  std::size_t word_vocab_size = 0;
  std::size_t pos_vocab_size = 0;     // P
  std::size_t tag_vocab_size = 0;     // T
  std::size_t dep_vocab_size = 0;     // D
  std::size_t entity_vocab_size = 0;  // E

  friend bool operator==(const DatasetStats&, const DatasetStats&) = default;
};

/// A word is a token with at least one alphabetic character.
bool is_word(std::string_view text);

/// Counts entity spans in an IOB tag sequence. A span starts at every B- tag
/// and at an I- tag that does not continue a span of the same type.
std::size_t count_entity_spans(const Sentence& sentence);

DatasetStats compute_stats(const Dataset& dataset);

std::string format_stats(const DatasetStats& stats);

}  // namespace oed::corpus
