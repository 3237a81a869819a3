#include "oed/featurize/tagger.hpp"

#include <fstream>
#include <sstream>

#include "oed/featurize/encoder.hpp"

namespace oed::featurize {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

}  // namespace

corpus::Dataset read_tagged_columns(const std::filesystem::path& path, corpus::Partition partition) {
  std::ifstream in(path);
  if (!in) throw corpus::CorpusError("cannot open tagged file " + path.string());
  corpus::Dataset dataset;
  dataset.partition = partition;
  corpus::Sentence current;
  std::size_t line_number = 0;
  auto flush = [&] {
    if (current.tokens.empty()) return;
    if (current.id.empty()) current.id = path.stem().string() + "-" + std::to_string(dataset.size() + 1);
    dataset.sentences.push_back(std::move(current));
    current = {};
  };
  std::string line;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (line.starts_with("# id = ")) {
      current.id = line.substr(7);
      continue;
    }
    if (line.starts_with("# date = ")) {
      current.source_date = line.substr(9);
      continue;
    }
    if (line.starts_with("#")) continue;
    const auto cols = split_tabs(line);
    if (cols.size() != 5 && cols.size() != 6) {
      throw corpus::CorpusError("tagged file: expected 5 or 6 tab-separated columns", line_number);
    }
    corpus::Token t;
    t.text = cols[0];
    t.pos_simple = cols[1];
    t.pos_detailed = cols[2];
    t.dep_rel = cols[3];
    t.entity_tag = cols[4];
    if (cols.size() == 6) {
      if (cols[5] != "0" && cols[5] != "1") throw corpus::CorpusError("tagged file: label must be 0 or 1", line_number);
      t.label = cols[5] == "1" ? corpus::Label::kTrigger : corpus::Label::kNonTrigger;
    }
    current.tokens.push_back(std::move(t));
  }
  flush();
  corpus::validate(dataset);
  return dataset;
}

ColumnFileTagger::ColumnFileTagger(const std::filesystem::path& path) : name_("columns-" + path.stem().string()) {
  for (auto& s : read_tagged_columns(path).sentences) {
    const auto id = s.id;
    tagged_.emplace(id, std::move(s));
  }
}

void ColumnFileTagger::annotate(corpus::Sentence& sentence) const {
  auto it = tagged_.find(sentence.id);
  if (it == tagged_.end()) throw FeatureError("tagger " + name_ + " has no entry for sentence \"" + sentence.id + "\"");
  const auto& src = it->second.tokens;
  if (src.size() != sentence.tokens.size()) {
    throw FeatureError("tagger " + name_ + ": token count mismatch for sentence \"" + sentence.id + "\"");
  }
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i].text != sentence.tokens[i].text) {
      throw FeatureError("tagger " + name_ + ": token text mismatch in sentence \"" + sentence.id + "\"");
    }
    sentence.tokens[i].pos_simple = src[i].pos_simple;
    sentence.tokens[i].pos_detailed = src[i].pos_detailed;
    sentence.tokens[i].dep_rel = src[i].dep_rel;
    sentence.tokens[i].entity_tag = src[i].entity_tag;
  }
}

}  // namespace oed::featurize
