#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "oed/common/error.hpp"

namespace oed::evalstats {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Counts thresholded predictions (p >= threshold is a trigger) against gold
/// labels. Positions with mask == 0 are skipped. Throws Error on length mismatch.
ConfusionCounts confusion(std::span<const double> predictions, std::span<const int> gold,
                          double threshold = 0.5, std::span<const int> mask = {});

/// Which harmonic mean a report calls "F1".
enum class F1Kind {
  kStandard,  ///< precision / sensitivity
  kSensSpec,  ///< sensitivity / specificity
};

std::string_view to_string(F1Kind kind);
F1Kind f1_kind_from_string(std::string_view name);

struct MetricSet {
  double sensitivity = 0;
  double specificity = 0;
  double precision = 0;
  double f1_std = 0;
  double f1_sens_spec = 0;
  /// True when any ratio above was 0/0 and was set to 0.
  bool has_undefined = false;

  double f1(F1Kind kind) const { return kind == F1Kind::kStandard ? f1_std : f1_sens_spec; }
};

/// Ratios from the counts; every 0/0 is reported as 0.
MetricSet metrics(const ConfusionCounts& c);

/// Harmonic mean 2ab/(a+b), 0 when a+b == 0.
double harmonic_mean(double a, double b);

}  // namespace oed::evalstats
