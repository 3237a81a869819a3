#pragma once

#include <cstddef>
#include <vector>

namespace oed::models {

/// Fixed-width token context centred on one token.
struct WindowInstance {
  static constexpr long kPad = -1;

  std::size_t center = 0;
  /// Token index per slot, kPad outside the sentence.
  std::vector<long> columns;
  /// Offset of each slot from the centre; empty for window 1.
  std::vector<int> positions;

  std::size_t padding_count() const;
};

/// One instance per token of a sentence with `length` tokens. Throws
/// UsageError for an even or non-positive window.
std::vector<WindowInstance> extract_windows(std::size_t length, int window);

/// Fraction of padded slots over all windows of a sentence.
double padding_fraction(std::size_t length, int window);

}  // namespace oed::models
