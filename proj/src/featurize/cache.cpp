#include "oed/featurize/cache.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <thread>

#include "oed/common/hash.hpp"

namespace oed::featurize {

namespace {

constexpr char kMagic[4] = {'O', 'E', 'D', 'F'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

FeatureCache::FeatureCache(std::filesystem::path root) : root_(std::move(root)) {}

std::string FeatureCache::escape(const std::string& key) {
  std::string out;
  for (unsigned char c : key) {
    if (std::isalnum(c) || c == '.' || c == '_' || c == '-') {
      out += static_cast<char>(c);
    } else {
      char buf[4];
      std::snprintf(buf, sizeof buf, "%%%02X", c);
      out += buf;
    }
  }
  if (out == "." || out == "..") out = "%2E" + out.substr(1);
  return out;
}

std::filesystem::path FeatureCache::path_for(const std::string& provider, const std::string& id) const {
  return root_ / escape(provider) / (escape(id) + ".bin");
}

std::mutex& FeatureCache::lock_for(const std::string& key) {
  return locks_[fnv1a64(key) % locks_.size()];
}

std::optional<TokenMatrix> FeatureCache::load(const std::string& provider, const std::string& id,
                                              std::size_t rows, std::size_t cols) const {
  std::ifstream in(path_for(provider, id), std::ios::binary);
  if (!in) return std::nullopt;
  char magic[4];
  std::uint32_t version = 0, r = 0, c = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&r), sizeof r);
  in.read(reinterpret_cast<char*>(&c), sizeof c);
  if (!in || std::memcmp(magic, kMagic, 4) != 0 || version != kVersion || r != rows || c != cols) {
    return std::nullopt;
  }
  TokenMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(sizeof(float) * rows * cols));
  if (!in) return std::nullopt;
  return m;
}

void FeatureCache::store(const std::string& provider, const std::string& id, const TokenMatrix& m) {
  const auto target = path_for(provider, id);
  std::lock_guard guard(lock_for(target.string()));
  std::filesystem::create_directories(target.parent_path());
  auto tmp = target;
  tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FeatureError("cannot write feature cache entry " + tmp.string());
    const auto r = static_cast<std::uint32_t>(m.rows());
    const auto c = static_cast<std::uint32_t>(m.cols());
    out.write(kMagic, 4);
    out.write(reinterpret_cast<const char*>(&kVersion), sizeof kVersion);
    out.write(reinterpret_cast<const char*>(&r), sizeof r);
    out.write(reinterpret_cast<const char*>(&c), sizeof c);
    out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(sizeof(float) * m.size()));
    if (!out) throw FeatureError("cannot write feature cache entry " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

}  // namespace oed::featurize
