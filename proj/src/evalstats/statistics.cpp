#include "oed/evalstats/statistics.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <boost/math/distributions/students_t.hpp>

namespace oed::evalstats {

double sample_mean(std::span<const double> values) {
  if (values.empty()) throw Error("mean of an empty sample");
  double sum = 0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) {
  if (values.size() < 2) throw Error("variance needs at least two values");
  const double mean = sample_mean(values);
  double ss = 0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(values.size() - 1);
}

MeanCi mean_ci(std::span<const double> values, double level) {
  if (values.size() < 2) throw Error("confidence interval needs at least two values");
  if (!(level > 0.0 && level < 1.0)) throw UsageError("confidence level must lie in (0, 1)");
  const auto n = static_cast<double>(values.size());
  boost::math::students_t dist(n - 1.0);
  const double t = boost::math::quantile(dist, 1.0 - (1.0 - level) / 2.0);
  return {sample_mean(values), t * std::sqrt(sample_variance(values)) / std::sqrt(n)};
}

double welch_df(std::span<const double> a, std::span<const double> b) {
  const double va = sample_variance(a) / static_cast<double>(a.size());
  const double vb = sample_variance(b) / static_cast<double>(b.size());
  const double num = (va + vb) * (va + vb);
  const double den = va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1);
  return num / den;
}

double one_tailed_t_test(std::span<const double> a, std::span<const double> b, TTestKind kind) {
  if (a.size() < 2 || b.size() < 2) throw Error("t-test needs at least two values per sample");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double diff = sample_mean(b) - sample_mean(a);
  const double var_a = sample_variance(a);
  const double var_b = sample_variance(b);

  double se = 0;
  double df = 0;
  if (kind == TTestKind::kWelch) {
    se = std::sqrt(var_a / na + var_b / nb);
    df = se > 0 ? welch_df(a, b) : na + nb - 2.0;
  } else {
    df = na + nb - 2.0;
    const double pooled = ((na - 1.0) * var_a + (nb - 1.0) * var_b) / df;
    se = std::sqrt(pooled * (1.0 / na + 1.0 / nb));
  }
  if (se == 0.0) {
    if (diff == 0.0) throw Error("t-test undefined: both samples have zero variance and equal means");
    return diff > 0 ? 0.0 : 1.0;
  }
  const double t = diff / se;
  boost::math::students_t dist(df);
  return boost::math::cdf(boost::math::complement(dist, t));
}

}  // namespace oed::evalstats
