#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "oed/common/error.hpp"

namespace oed::featurize {

/// Per-token input features. Order is the canonical concatenation order.
enum class FeatureKind : std::uint8_t { W, P, T, D, E, Sp, B, S, Po };

inline constexpr std::array<FeatureKind, 9> kAllKinds = {
    FeatureKind::W,  FeatureKind::P, FeatureKind::T, FeatureKind::D, FeatureKind::E,
    FeatureKind::Sp, FeatureKind::B, FeatureKind::S, FeatureKind::Po};

std::string_view to_string(FeatureKind kind);
std::optional<FeatureKind> kind_from_string(std::string_view name);

/// Embedding width. Po has no fixed width; callers pass it explicitly.
std::size_t dim(FeatureKind kind, std::size_t po_dim = 0);

/// Kinds looked up in a trainable table (W starts from pretrained vectors).
constexpr bool is_trainable(FeatureKind k) {
  return k == FeatureKind::W || k == FeatureKind::P || k == FeatureKind::T ||
         k == FeatureKind::D || k == FeatureKind::E || k == FeatureKind::Po;
}

/// Tag-valued kinds with a TagVocabulary.
constexpr bool is_categorical(FeatureKind k) {
  return k == FeatureKind::P || k == FeatureKind::T || k == FeatureKind::D || k == FeatureKind::E;
}

/// Frozen dense vectors coming from a contextual encoder (S is derived from B).
constexpr bool is_frozen(FeatureKind k) { return !is_trainable(k); }

class FeatureExprError : public UsageError {
 public:
  using UsageError::UsageError;
};

/// Small value-type set of feature kinds, iterated in canonical order.
class FeatureSet {
 public:
  constexpr FeatureSet() = default;
  FeatureSet(std::initializer_list<FeatureKind> kinds) {
    for (auto k : kinds) insert(k);
  }

  /// {W,P,T,D,E,Sp,B,S}; Po is CNN-only and never part of "all".
  static FeatureSet all();

  constexpr void insert(FeatureKind k) { bits_ |= bit(k); }
  constexpr void erase(FeatureKind k) { bits_ &= static_cast<std::uint16_t>(~bit(k)); }
  constexpr bool contains(FeatureKind k) const { return (bits_ & bit(k)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  std::size_t size() const;
  std::vector<FeatureKind> kinds() const;

  FeatureSet operator|(FeatureSet o) const { return from_bits(bits_ | o.bits_); }
  FeatureSet operator&(FeatureSet o) const { return from_bits(bits_ & o.bits_); }
  FeatureSet operator-(FeatureSet o) const { return from_bits(bits_ & ~o.bits_); }
  friend bool operator==(FeatureSet, FeatureSet) = default;

  /// "{B,S}" in canonical order.
  std::string to_string() const;

 private:
  static constexpr std::uint16_t bit(FeatureKind k) {
    return static_cast<std::uint16_t>(1u << static_cast<unsigned>(k));
  }
  static FeatureSet from_bits(unsigned bits) {
    FeatureSet s;
    s.bits_ = static_cast<std::uint16_t>(bits);
    return s;
  }
  std::uint16_t bits_ = 0;
};

/// Parses `all`, `all-{K,...}` or `{K,...}`. Throws FeatureExprError on an
/// unknown kind, malformed text, or an empty result.
FeatureSet parse_feature_expr(std::string_view text);

/// Width of the per-token concatenation of `kinds`.
std::size_t concat_dim(FeatureSet kinds, std::size_t po_dim = 0);

}  // namespace oed::featurize
