#include "oed/featurize/encoder.hpp"

#include <cctype>
#include <fstream>

#include <json.hpp>

#include "oed/common/hash.hpp"
#include "oed/common/rng.hpp"

namespace oed::featurize {

TokenMatrix align_subwords(const TokenMatrix& pieces, std::span<const int> piece_token,
                           std::size_t token_count) {
  if (static_cast<std::size_t>(pieces.rows()) != piece_token.size()) {
    throw FeatureError("subword alignment: piece count does not match piece_token length");
  }
  TokenMatrix out = TokenMatrix::Zero(static_cast<Eigen::Index>(token_count), pieces.cols());
  std::vector<int> counts(token_count, 0);
  for (std::size_t i = 0; i < piece_token.size(); ++i) {
    const int t = piece_token[i];
    if (t < 0 || static_cast<std::size_t>(t) >= token_count) {
      throw FeatureError("subword alignment: piece maps to token " + std::to_string(t) +
                         " outside the sentence");
    }
    out.row(t) += pieces.row(static_cast<Eigen::Index>(i));
    ++counts[static_cast<std::size_t>(t)];
  }
  for (std::size_t t = 0; t < token_count; ++t) {
    if (counts[t] == 0) throw FeatureError("subword alignment: token " + std::to_string(t) + " has no pieces");
    out.row(static_cast<Eigen::Index>(t)) /= static_cast<float>(counts[t]);
  }
  return out;
}

std::vector<float> sentence_embedding(std::span<const std::vector<float>> token_vectors) {
  if (token_vectors.empty()) throw FeatureError("sentence embedding of an empty sentence");
  std::vector<float> sum(token_vectors.front().size(), 0.0f);
  for (const auto& v : token_vectors) {
    if (v.size() != sum.size()) throw FeatureError("sentence embedding: mixed vector dimensions");
    for (std::size_t d = 0; d < v.size(); ++d) sum[d] += v[d];
  }
  return sum;
}

std::vector<float> sentence_embedding(const TokenMatrix& token_vectors) {
  if (token_vectors.rows() == 0) throw FeatureError("sentence embedding of an empty sentence");
  std::vector<float> sum(static_cast<std::size_t>(token_vectors.cols()), 0.0f);
  for (Eigen::Index r = 0; r < token_vectors.rows(); ++r) {
    for (Eigen::Index d = 0; d < token_vectors.cols(); ++d) sum[static_cast<std::size_t>(d)] += token_vectors(r, d);
  }
  return sum;
}

HashedContextEncoder::HashedContextEncoder(Options options) : options_(options) {
  if (options_.dim == 0 || options_.piece_length == 0) {
    throw FeatureError("hashed-context encoder needs positive dim and piece_length");
  }
}

std::string HashedContextEncoder::name() const {
  return "hashed-context-d" + std::to_string(options_.dim) + "-w" + std::to_string(options_.window) +
         "-p" + std::to_string(options_.piece_length) + "-s" + std::to_string(options_.salt);
}

std::vector<std::string> HashedContextEncoder::pieces(const std::string& token) const {
  std::string lower = token;
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  std::vector<std::string> out;
  for (std::size_t i = 0; i < lower.size(); i += options_.piece_length) {
    out.push_back(lower.substr(i, options_.piece_length));
  }
  return out;
}

void HashedContextEncoder::base_vector(const std::string& piece, float* out) const {
  const std::uint64_t h = fnv1a64(piece) ^ mix64(options_.salt);
  for (std::size_t d = 0; d < options_.dim; ++d) {
    const std::uint64_t x = mix64(h + 0x9e3779b97f4a7c15ULL * (d + 1));
    // Uniform in [-0.5, 0.5) from the top 24 bits; exact in float.
    out[d] = static_cast<float>(x >> 40) * 0x1.0p-24f - 0.5f;
  }
}

TokenMatrix HashedContextEncoder::encode(const corpus::Sentence& sentence) const {
  std::vector<std::string> all_pieces;
  std::vector<int> piece_token;
  for (std::size_t t = 0; t < sentence.tokens.size(); ++t) {
    for (auto& p : pieces(sentence.tokens[t].text)) {
      all_pieces.push_back(std::move(p));
      piece_token.push_back(static_cast<int>(t));
    }
  }
  const auto n = static_cast<Eigen::Index>(all_pieces.size());
  const auto dim = static_cast<Eigen::Index>(options_.dim);
  TokenMatrix base(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) base_vector(all_pieces[static_cast<std::size_t>(i)], base.row(i).data());

  TokenMatrix contextual = base;
  const auto window = static_cast<Eigen::Index>(options_.window);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index off = 1; off <= window; ++off) {
      const float weight = 1.0f / static_cast<float>(1 + off);
      if (i - off >= 0) contextual.row(i) += weight * base.row(i - off);
      if (i + off < n) contextual.row(i) += weight * base.row(i + off);
    }
  }
  return align_subwords(contextual, piece_token, sentence.tokens.size());
}

PrecomputedEncoder::PrecomputedEncoder(const std::filesystem::path& path, std::size_t dim, int layer)
    : name_("precomputed-" + path.stem().string() + "-d" + std::to_string(dim) + "-l" + std::to_string(layer)),
      dim_(dim) {
  std::ifstream in(path);
  if (!in) throw FeatureError("cannot open precomputed vectors " + path.string());
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = path.string() + ":" + std::to_string(line_number);
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw FeatureError(where + ": " + e.what());
    }
    Entry entry;
    entry.piece_token = record.at("piece_token").get<std::vector<int>>();
    const nlohmann::json* rows = nullptr;
    if (record.contains("layers")) {
      const auto& layers = record.at("layers");
      const int count = static_cast<int>(layers.size());
      const int pick = layer < 0 ? count + layer : layer;
      if (pick < 0 || pick >= count) throw FeatureError(where + ": layer " + std::to_string(layer) + " not present");
      rows = &layers.at(static_cast<std::size_t>(pick));
    } else {
      rows = &record.at("pieces");
    }
    entry.pieces.resize(static_cast<Eigen::Index>(rows->size()), static_cast<Eigen::Index>(dim));
    for (std::size_t r = 0; r < rows->size(); ++r) {
      const auto& row = (*rows)[r];
      if (row.size() != dim) throw FeatureError(where + ": piece vector has wrong dimension");
      for (std::size_t c = 0; c < dim; ++c) {
        entry.pieces(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c].get<float>();
      }
    }
    entries_.emplace(record.at("id").get<std::string>(), std::move(entry));
  }
}

TokenMatrix PrecomputedEncoder::encode(const corpus::Sentence& sentence) const {
  auto it = entries_.find(sentence.id);
  if (it == entries_.end()) throw FeatureError("no precomputed vectors for sentence \"" + sentence.id + "\"");
  return align_subwords(it->second.pieces, it->second.piece_token, sentence.tokens.size());
}

namespace {

std::string param_or(const ProviderSpec& spec, const std::string& key, const std::string& fallback) {
  auto it = spec.params.find(key);
  return it == spec.params.end() ? fallback : it->second;
}

}  // namespace

std::shared_ptr<const ContextualEncoder> make_encoder(const ProviderSpec& spec, std::size_t dim) {
  try {
    if (spec.name == "hashed-context") {
      HashedContextEncoder::Options o;
      o.dim = dim;
      o.window = std::stoul(param_or(spec, "window", "2"));
      o.piece_length = std::stoul(param_or(spec, "piece_length", "4"));
      o.salt = std::stoull(param_or(spec, "salt", dim == 768 ? "0" : "96"));
      return std::make_shared<HashedContextEncoder>(o);
    }
    if (spec.name == "precomputed") {
      const auto path = param_or(spec, "path", "");
      if (path.empty()) throw UsageError("precomputed provider needs a \"path\" parameter");
      return std::make_shared<PrecomputedEncoder>(path, dim, std::stoi(param_or(spec, "layer", "-1")));
    }
  } catch (const std::invalid_argument&) {
    throw UsageError("provider \"" + spec.name + "\": non-numeric parameter");
  } catch (const std::out_of_range&) {
    throw UsageError("provider \"" + spec.name + "\": parameter out of range");
  }
  throw UsageError("unknown encoder provider \"" + spec.name + "\"");
}

}  // namespace oed::featurize
