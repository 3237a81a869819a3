#pragma once

#include <span>

#include "oed/common/error.hpp"

namespace oed::evalstats {

struct MeanCi {
  double mean = 0;
  /// Half-width of the two-sided confidence interval.
  double halfwidth = 0;
};

/// Mean and t-based confidence half-width: t(1 - alpha/2, n-1) * s / sqrt(n).
/// Requires n >= 2.
MeanCi mean_ci(std::span<const double> values, double level = 0.95);

double sample_mean(std::span<const double> values);
/// Unbiased (n-1) variance.
double sample_variance(std::span<const double> values);

enum class TTestKind { kWelch, kStudent };

/// One-tailed two-sample t-test of H1: mean(b) > mean(a). Returns the p-value.
/// Welch degrees of freedom by default; kStudent pools the variances.
/// Throws Error when either sample has fewer than two values, or when both
/// have zero variance and equal means.
double one_tailed_t_test(std::span<const double> a, std::span<const double> b,
                         TTestKind kind = TTestKind::kWelch);

/// Welch-Satterthwaite degrees of freedom.
double welch_df(std::span<const double> a, std::span<const double> b);

}  // namespace oed::evalstats
