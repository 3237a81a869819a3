#include "oed/models/windows.hpp"

#include <algorithm>
#include <string>

#include "oed/common/error.hpp"

namespace oed::models {

std::size_t WindowInstance::padding_count() const {
  return static_cast<std::size_t>(std::count(columns.begin(), columns.end(), kPad));
}

std::vector<WindowInstance> extract_windows(std::size_t length, int window) {
  if (window < 1 || window % 2 == 0) {
    throw UsageError("window must be odd and at least 1, got " + std::to_string(window));
  }
  const long half = window / 2;
  const long n = static_cast<long>(length);
  std::vector<WindowInstance> out(length);
  for (long c = 0; c < n; ++c) {
    auto& w = out[static_cast<std::size_t>(c)];
    w.center = static_cast<std::size_t>(c);
    w.columns.reserve(static_cast<std::size_t>(window));
    for (long k = -half; k <= half; ++k) {
      const long t = c + k;
      w.columns.push_back(t < 0 || t >= n ? WindowInstance::kPad : t);
      if (window > 1) w.positions.push_back(static_cast<int>(k));
    }
  }
  return out;
}

double padding_fraction(std::size_t length, int window) {
  if (length == 0) return 0.0;
  std::size_t pads = 0;
  for (const auto& w : extract_windows(length, window)) pads += w.padding_count();
  return static_cast<double>(pads) / static_cast<double>(length * static_cast<std::size_t>(window));
}

}  // namespace oed::models
