#include "oed/corpus/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "oed/common/rng.hpp"

namespace oed::corpus {

using nlohmann::json;

namespace {

std::string at_line(std::size_t line) {
  return line == 0 ? std::string() : " at line " + std::to_string(line);
}

bool is_iso_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  const int month = (s[5] - '0') * 10 + (s[6] - '0');
  const int day = (s[8] - '0') * 10 + (s[9] - '0');
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

const std::string& require_string(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw CorpusError(std::string("malformed record: field \"") + key +
                          "\" missing or not a string",
                      line);
  }
  return it->get_ref<const std::string&>();
}

}  // namespace

CorpusError::CorpusError(const std::string& message, std::size_t line)
    : Error(message + at_line(line)), line_(line) {}

std::vector<int> Sentence::labels() const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(static_cast<int>(t.label));
  return out;
}

std::string_view to_string(Partition p) {
  return p == Partition::kTrainVal ? "trainval" : "test";
}

std::size_t Dataset::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.size();
  return n;
}

bool is_valid_entity_tag(std::string_view tag) {
  if (tag == "O") return true;
  return tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-';
}

Sentence parse_sentence_line(std::string_view line, std::size_t line_number) {
  json record;
  try {
    record = json::parse(line);
  } catch (const json::parse_error& e) {
    throw CorpusError(std::string("malformed record: ") + e.what(), line_number);
  }
  if (!record.is_object()) throw CorpusError("malformed record: not an object", line_number);

  Sentence s;
  s.id = require_string(record, "id", line_number);
  if (s.id.empty()) throw CorpusError("malformed record: empty id", line_number);

  if (auto it = record.find("date"); it != record.end() && !it->is_null()) {
    if (!it->is_string() || !is_iso_date(it->get_ref<const std::string&>())) {
      throw CorpusError("malformed record: date must be YYYY-MM-DD or null", line_number);
    }
    s.source_date = it->get<std::string>();
  }

  auto tokens = record.find("tokens");
  if (tokens == record.end() || !tokens->is_array()) {
    throw CorpusError("malformed record: \"tokens\" missing or not an array", line_number);
  }
  if (tokens->empty()) throw CorpusError("malformed record: sentence has no tokens", line_number);

  s.tokens.reserve(tokens->size());
  for (const auto& tj : *tokens) {
    if (!tj.is_object()) throw CorpusError("malformed record: token is not an object", line_number);
    Token t;
    t.text = require_string(tj, "t", line_number);
    if (t.text.empty()) throw CorpusError("malformed record: empty token text", line_number);
    auto y = tj.find("y");
    if (y == tj.end() || !y->is_number_integer() || (y->get<int>() != 0 && y->get<int>() != 1)) {
      throw CorpusError("malformed record: token label \"y\" must be 0 or 1", line_number);
    }
    t.label = y->get<int>() == 1 ? Label::kTrigger : Label::kNonTrigger;
    t.pos_simple = require_string(tj, "pos", line_number);
    t.pos_detailed = require_string(tj, "tag", line_number);
    t.dep_rel = require_string(tj, "dep", line_number);
    t.entity_tag = require_string(tj, "ent", line_number);
    if (!is_valid_entity_tag(t.entity_tag)) {
      throw CorpusError("invalid entity tag \"" + t.entity_tag + "\"", line_number);
    }
    s.tokens.push_back(std::move(t));
  }
  return s;
}

std::string sentence_to_json_line(const Sentence& s) {
  json tokens = json::array();
  for (const auto& t : s.tokens) {
    tokens.push_back(json{{"t", t.text},
                          {"y", static_cast<int>(t.label)},
                          {"pos", t.pos_simple},
                          {"tag", t.pos_detailed},
                          {"dep", t.dep_rel},
                          {"ent", t.entity_tag}});
  }
  json record{{"id", s.id},
              {"date", s.source_date ? json(*s.source_date) : json(nullptr)},
              {"tokens", std::move(tokens)}};
  return record.dump();
}

void validate(const Dataset& dataset) {
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < dataset.sentences.size(); ++i) {
    const auto& s = dataset.sentences[i];
    if (s.id.empty()) throw CorpusError("sentence " + std::to_string(i) + " has an empty id");
    if (s.tokens.empty()) throw CorpusError("sentence \"" + s.id + "\" has no tokens");
    if (!seen.insert(s.id).second) throw CorpusError("duplicate id \"" + s.id + "\"");
    for (const auto& t : s.tokens) {
      if (t.text.empty()) throw CorpusError("sentence \"" + s.id + "\" has an empty token");
      if (!is_valid_entity_tag(t.entity_tag)) {
        throw CorpusError("invalid entity tag \"" + t.entity_tag + "\" in sentence \"" + s.id + "\"");
      }
    }
  }
}

Dataset parse_dataset(std::string_view jsonl, Partition partition) {
  Dataset dataset;
  dataset.partition = partition;
  std::unordered_set<std::string> seen;
  std::size_t line_number = 0;
  std::size_t start = 0;
  while (start <= jsonl.size()) {
    std::size_t end = jsonl.find('\n', start);
    if (end == std::string_view::npos) end = jsonl.size();
    std::string_view line = jsonl.substr(start, end - start);
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") != std::string_view::npos) {
      Sentence s = parse_sentence_line(line, line_number);
      if (!seen.insert(s.id).second) {
        throw CorpusError("duplicate id \"" + s.id + "\"", line_number);
      }
      dataset.sentences.push_back(std::move(s));
    }
    if (end == jsonl.size()) break;
    start = end + 1;
  }
  return dataset;
}

Dataset load_dataset(const std::filesystem::path& path, Partition partition) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot open dataset file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_dataset(buffer.str(), partition);
}

std::string to_jsonl(const Dataset& dataset) {
  std::string out;
  for (const auto& s : dataset.sentences) {
    out += sentence_to_json_line(s);
    out += '\n';
  }
  return out;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CorpusError("cannot write dataset file " + path.string());
  out << to_jsonl(dataset);
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open manifest " + path.string());
  Manifest manifest;
  const auto base = path.parent_path();
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw CorpusError("manifest: expected \"key: path\"", line_number);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, colon));
    const std::filesystem::path value = trim(line.substr(colon + 1));
    const auto resolved = value.is_absolute() ? value : base / value;
    if (key == "trainval") {
      manifest.trainval = resolved;
    } else if (key == "test") {
      manifest.test = resolved;
    } else {
      throw CorpusError("manifest: unknown key \"" + key + "\"", line_number);
    }
  }
  if (manifest.trainval.empty() || manifest.test.empty()) {
    throw CorpusError("manifest must list both trainval: and test: paths");
  }
  return manifest;
}

void check_disjoint(const Dataset& a, const Dataset& b) {
  std::unordered_set<std::string> ids;
  for (const auto& s : a.sentences) ids.insert(s.id);
  for (const auto& s : b.sentences) {
    if (ids.count(s.id)) throw CorpusError("sentence id \"" + s.id + "\" appears in both partitions");
  }
}

Corpus load_corpus(const Manifest& manifest) {
  Corpus corpus{load_dataset(manifest.trainval, Partition::kTrainVal),
                load_dataset(manifest.test, Partition::kTest)};
  check_disjoint(corpus.trainval, corpus.test);
  return corpus;
}

SplitIndices split_indices(std::size_t n, const SplitSpec& spec) {
  if (!(spec.validation_fraction > 0.0 && spec.validation_fraction < 1.0)) {
    throw UsageError("validation_fraction must lie in (0, 1)");
  }
  // The epsilon absorbs representation error, e.g. (1 - 0.2) * 10.
  const auto train_size = static_cast<std::size_t>(
      std::ceil((1.0 - spec.validation_fraction) * static_cast<double>(n) - 1e-9));

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(spec.seed);
  rng.shuffle(std::span<std::size_t>(order));

  SplitIndices out;
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(train_size));
  out.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(train_size), order.end());
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, const SplitSpec& spec) {
  if (dataset.partition != Partition::kTrainVal) {
    throw CorpusError("only the trainval partition can be split");
  }
  const auto idx = split_indices(dataset.size(), spec);
  std::pair<Dataset, Dataset> out;
  out.first.partition = out.second.partition = Partition::kTrainVal;
  for (std::size_t i : idx.train) out.first.sentences.push_back(dataset.sentences[i]);
  for (std::size_t i : idx.validation) out.second.sentences.push_back(dataset.sentences[i]);
  return out;
}

}  // namespace oed::corpus
