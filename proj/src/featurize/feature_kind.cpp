#include "oed/featurize/feature_kind.hpp"

#include <bit>

namespace oed::featurize {

namespace {

constexpr std::array<std::string_view, 9> kNames = {"W", "P", "T", "D", "E", "Sp", "B", "S", "Po"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

// Parses "{K,...}" (braces included). An empty list is allowed here; the
// caller decides whether an empty result is acceptable.
FeatureSet parse_braced_list(std::string_view text, std::string_view whole) {
  text = trim(text);
  if (text.size() < 2 || text.front() != '{' || text.back() != '}') {
    throw FeatureExprError("malformed feature expression \"" + std::string(whole) +
                           "\": expected all, all-{...} or {...}");
  }
  text = trim(text.substr(1, text.size() - 2));
  FeatureSet set;
  if (text.empty()) return set;
  while (true) {
    const auto comma = text.find(',');
    const auto item = trim(text.substr(0, comma));
    const auto kind = kind_from_string(item);
    if (!kind) {
      throw FeatureExprError("unknown feature kind \"" + std::string(item) + "\" in \"" +
                             std::string(whole) + "\"");
    }
    set.insert(*kind);
    if (comma == std::string_view::npos) break;
    text = text.substr(comma + 1);
  }
  return set;
}

}  // namespace

std::string_view to_string(FeatureKind kind) { return kNames[static_cast<std::size_t>(kind)]; }

std::optional<FeatureKind> kind_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return kAllKinds[i];
  }
  return std::nullopt;
}

std::size_t dim(FeatureKind kind, std::size_t po_dim) {
  switch (kind) {
    case FeatureKind::W: return 300;
    case FeatureKind::P:
    case FeatureKind::T:
    case FeatureKind::D:
    case FeatureKind::E: return 10;
    case FeatureKind::Sp: return 96;
    case FeatureKind::B:
    case FeatureKind::S: return 768;
    case FeatureKind::Po: return po_dim;
  }
  return 0;
}

FeatureSet FeatureSet::all() {
  return {FeatureKind::W, FeatureKind::P,  FeatureKind::T, FeatureKind::D,
          FeatureKind::E, FeatureKind::Sp, FeatureKind::B, FeatureKind::S};
}

std::size_t FeatureSet::size() const { return static_cast<std::size_t>(std::popcount(bits_)); }

std::vector<FeatureKind> FeatureSet::kinds() const {
  std::vector<FeatureKind> out;
  for (auto k : kAllKinds) {
    if (contains(k)) out.push_back(k);
  }
  return out;
}

std::string FeatureSet::to_string() const {
  std::string out = "{";
  bool first = true;
  for (auto k : kinds()) {
    if (!first) out += ',';
    out += featurize::to_string(k);
    first = false;
  }
  return out + "}";
}

FeatureSet parse_feature_expr(std::string_view text) {
  const std::string_view whole = text;
  text = trim(text);
  FeatureSet result;
  if (text.starts_with("all")) {
    auto rest = trim(text.substr(3));
    if (rest.empty()) {
      result = FeatureSet::all();
    } else {
      // ASCII hyphen or U+2212 MINUS SIGN.
      if (rest.starts_with("-")) {
        rest.remove_prefix(1);
      } else if (rest.starts_with("\xE2\x88\x92")) {
        rest.remove_prefix(3);
      } else {
        throw FeatureExprError("malformed feature expression \"" + std::string(whole) + "\"");
      }
      result = FeatureSet::all() - parse_braced_list(rest, whole);
    }
  } else {
    result = parse_braced_list(text, whole);
  }
  if (result.empty()) {
    throw FeatureExprError("feature expression \"" + std::string(whole) + "\" selects no features");
  }
  return result;
}

std::size_t concat_dim(FeatureSet kinds, std::size_t po_dim) {
  std::size_t total = 0;
  for (auto k : kinds.kinds()) total += dim(k, po_dim);
  return total;
}

}  // namespace oed::featurize
