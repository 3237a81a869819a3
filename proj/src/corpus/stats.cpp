#include "oed/corpus/stats.hpp"

#include <cstdio>
#include <set>
#include <sstream>

namespace oed::corpus {

namespace {

// Decodes one UTF-8 code point starting at i; advances i. Invalid bytes are
// returned as-is so that scanning always terminates.
char32_t next_code_point(std::string_view s, std::size_t& i) {
  const auto lead = static_cast<unsigned char>(s[i]);
  const int extra = lead < 0x80           ? 0
                    : (lead >> 5) == 0x6  ? 1
                    : (lead >> 4) == 0xE  ? 2
                    : (lead >> 3) == 0x1E ? 3
                                          : -1;
  if (extra <= 0 || i + static_cast<std::size_t>(extra) >= s.size()) {
    ++i;
    return lead;
  }
  char32_t cp = lead & (0x3F >> extra);
  for (int k = 1; k <= extra; ++k) {
    const auto c = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
    if ((c & 0xC0) != 0x80) {
      ++i;
      return lead;
    }
    cp = (cp << 6) | (c & 0x3F);
  }
  i += static_cast<std::size_t>(extra) + 1;
  return cp;
}

// Letters: ASCII, Latin-1/Latin Extended (minus x and division signs), and the
// alphabetic script blocks. Punctuation, symbol and digit blocks are excluded.
bool is_letter(char32_t cp) {
  if ((cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z')) return true;
  if (cp >= 0xC0 && cp <= 0x24F) return cp != 0xD7 && cp != 0xF7;
  if (cp >= 0x370 && cp <= 0x1FFF) return true;
  if (cp >= 0x2C00 && cp <= 0x2DFF) return true;
  if (cp >= 0x3040 && cp <= 0xD7FF) return true;
  return false;
}

}  // namespace

bool is_word(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size()) {
    if (is_letter(next_code_point(text, i))) return true;
  }
  return false;
}

std::size_t count_entity_spans(const Sentence& sentence) {
  std::size_t spans = 0;
  std::string_view previous_type;
  for (const auto& t : sentence.tokens) {
    std::string_view tag = t.entity_tag;
    if (tag == "O" || tag.size() < 3) {
      previous_type = {};
      continue;
    }
    std::string_view type = tag.substr(2);
    if (tag[0] == 'B' || type != previous_type) ++spans;
    previous_type = type;
  }
  return spans;
}

DatasetStats compute_stats(const Dataset& dataset) {
  DatasetStats st;
  std::set<std::string> words, pos, tag, dep, ent;
  st.sentence_count = dataset.size();
  for (const auto& s : dataset.sentences) {
    st.entity_count += count_entity_spans(s);
    for (const auto& t : s.tokens) {
      ++st.token_count;
      if (is_word(t.text)) ++st.word_count;
      if (t.is_trigger()) ++st.event_count;
      words.insert(t.text);
      pos.insert(t.pos_simple);
      tag.insert(t.pos_detailed);
      dep.insert(t.dep_rel);
      ent.insert(t.entity_tag);
    }
  }
  st.word_vocab_size = words.size();
  st.pos_vocab_size = pos.size();
  st.tag_vocab_size = tag.size();
  st.dep_vocab_size = dep.size();
  st.entity_vocab_size = ent.size();
  if (st.sentence_count > 0) {
    const auto n = static_cast<double>(st.sentence_count);
    st.avg_tokens = static_cast<double>(st.token_count) / n;
    st.avg_words = static_cast<double>(st.word_count) / n;
    st.avg_entities = static_cast<double>(st.entity_count) / n;
    st.avg_events = static_cast<double>(st.event_count) / n;
  }
  return st;
}

std::string format_stats(const DatasetStats& st) {
  std::ostringstream out;
  char line[128];
  auto row = [&](const char* name, std::size_t total, double avg) {
    std::snprintf(line, sizeof line, "%-14s %10zu %10.2f\n", name, total, avg);
    out << line;
  };
  std::snprintf(line, sizeof line, "%-14s %10s %10s\n", "Metric", "Total", "Avg/Sent");
  out << line;
  std::snprintf(line, sizeof line, "%-14s %10zu\n", "Sentences", st.sentence_count);
  out << line;
  row("Tokens", st.token_count, st.avg_tokens);
  row("Words", st.word_count, st.avg_words);
  row("Entities", st.entity_count, st.avg_entities);
  row("Events", st.event_count, st.avg_events);
  out << "\nVocabulary sizes\n";
  auto vocab = [&](const char* name, std::size_t n) {
    std::snprintf(line, sizeof line, "%-14s %10zu\n", name, n);
    out << line;
  };
  vocab("Word", st.word_vocab_size);
  vocab("Entity (E)", st.entity_vocab_size);
  vocab("POS (P)", st.pos_vocab_size);
  vocab("Dep (D)", st.dep_vocab_size);
  vocab("Tag (T)", st.tag_vocab_size);
  return out.str();
}

}  // namespace oed::corpus
