#pragma once

#include <array>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>

#include "oed/featurize/encoder.hpp"

namespace oed::featurize {

/// On-disk store of frozen encoder output: <root>/<provider>/<sentence-id>.bin.
/// Blobs are written to a temporary name and renamed, so readers never see a
/// partial file; writes to the same key are serialized.
class FeatureCache {
 public:
  explicit FeatureCache(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path path_for(const std::string& provider, const std::string& sentence_id) const;

  /// Cached matrix, or nothing when absent or when its shape differs from
  /// the expected one (stale entry).
  std::optional<TokenMatrix> load(const std::string& provider, const std::string& sentence_id,
                                  std::size_t rows, std::size_t cols) const;
  void store(const std::string& provider, const std::string& sentence_id, const TokenMatrix& m);

  /// File-system-safe rendering of an id: [A-Za-z0-9._-] kept, rest %XX.
  static std::string escape(const std::string& key);

 private:
  std::mutex& lock_for(const std::string& key);

  std::filesystem::path root_;
  std::array<std::mutex, 16> locks_;
};

}  // namespace oed::featurize
