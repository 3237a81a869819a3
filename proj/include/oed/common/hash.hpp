#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace oed {

/// 64-bit FNV-1a. Stable across platforms and processes, unlike std::hash.
constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string to_hex(std::uint64_t value);

}  // namespace oed
