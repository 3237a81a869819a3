#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "oed/corpus/dataset.hpp"

namespace oed::featurize {

/// Row-major float matrix; one row per token.
using TokenMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class FeatureError : public Error {
 public:
  using Error::Error;
};

/// Produces one frozen vector per corpus token. Implementations must be
/// deterministic: the same sentence always yields byte-identical output.
class ContextualEncoder {
 public:
  virtual ~ContextualEncoder() = default;

  /// Stable identifier; also the feature-cache directory name.
  virtual std::string name() const = 0;
  virtual std::size_t dim() const = 0;
  /// False if encode() must not be called from several threads at once.
  virtual bool concurrent() const { return true; }
  virtual TokenMatrix encode(const corpus::Sentence& sentence) const = 0;
};

/// Averages subword vectors into one vector per corpus token.
/// `piece_token[i]` is the token that piece row i belongs to; every token must
/// own at least one piece.
TokenMatrix align_subwords(const TokenMatrix& pieces, std::span<const int> piece_token,
                           std::size_t token_count);

/// Elementwise sum of token vectors. Throws FeatureError on an empty input or
/// mixed dimensions.
std::vector<float> sentence_embedding(std::span<const std::vector<float>> token_vectors);
std::vector<float> sentence_embedding(const TokenMatrix& token_vectors);

/// Deterministic stand-in for a transformer encoder.
///
/// Each token is cut into fixed-length character pieces; a piece's base vector
/// is derived from its hash. A piece's contextual vector adds its neighbours'
/// base vectors within `window` pieces, damped by 1/(1+distance), and token
/// vectors are the mean of their pieces. Tokens sharing a piece therefore get
/// correlated vectors, and every vector carries some left/right context.
class HashedContextEncoder final : public ContextualEncoder {
 public:
  struct Options {
    std::size_t dim = 768;
    std::size_t window = 2;
    std::size_t piece_length = 4;
    std::uint64_t salt = 0;
  };

  explicit HashedContextEncoder(Options options);

  std::string name() const override;
  std::size_t dim() const override { return options_.dim; }
  TokenMatrix encode(const corpus::Sentence& sentence) const override;

  /// Pieces of one token (lower-cased, split every piece_length bytes).
  std::vector<std::string> pieces(const std::string& token) const;

 private:
  void base_vector(const std::string& piece, float* out) const;
  Options options_;
};

/// Vectors computed offline by a real encoder (for example a transformer's
/// final hidden layer), stored as JSON lines:
///   {"id": "...", "piece_token": [0,0,1,...], "pieces": [[...], ...]}
/// or, for several layers, "layers": [[[...]...], ...] with `layer` selecting
/// one (negative counts from the last). Pieces are mean-aligned to tokens.
class PrecomputedEncoder final : public ContextualEncoder {
 public:
  PrecomputedEncoder(const std::filesystem::path& path, std::size_t dim, int layer = -1);

  std::string name() const override { return name_; }
  std::size_t dim() const override { return dim_; }
  TokenMatrix encode(const corpus::Sentence& sentence) const override;

 private:
  struct Entry {
    TokenMatrix pieces;
    std::vector<int> piece_token;
  };
  std::string name_;
  std::size_t dim_;
  std::unordered_map<std::string, Entry> entries_;
};

/// Name plus string parameters, as written in experiment configs.
struct ProviderSpec {
  std::string name = "hashed-context";
  std::map<std::string, std::string> params;
  friend bool operator==(const ProviderSpec&, const ProviderSpec&) = default;
};

/// Builds an encoder from a spec: "hashed-context" (params: window,
/// piece_length, salt) or "precomputed" (params: path, layer).
std::shared_ptr<const ContextualEncoder> make_encoder(const ProviderSpec& spec, std::size_t dim);

}  // namespace oed::featurize
