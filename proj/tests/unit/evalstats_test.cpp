#include <doctest.h>

#include <cmath>
#include <vector>

#include "oed/common/rng.hpp"
#include "oed/evalstats/metrics.hpp"
#include "oed/evalstats/statistics.hpp"

using namespace oed;
using namespace oed::evalstats;

namespace {

struct Brute {
  long tp = 0, fp = 0, tn = 0, fn = 0;
};

Brute brute_counts(const std::vector<double>& p, const std::vector<int>& y, double threshold) {
  Brute b;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const bool pred = !(p[i] < threshold);
    if (pred && y[i] == 1) ++b.tp;
    if (pred && y[i] == 0) ++b.fp;
    if (!pred && y[i] == 0) ++b.tn;
    if (!pred && y[i] == 1) ++b.fn;
  }
  return b;
}

double ratio(long num, long den) { return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den); }

}  // namespace

TEST_CASE("confusion counts and metrics match a brute-force oracle") {
  Rng rng(2024);
  for (int round = 0; round < 50; ++round) {
    const std::size_t n = 1 + rng.below(1000);
    const double rate = rng.uniform();
    std::vector<double> p(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = rng.uniform();
      y[i] = rng.bernoulli(rate) ? 1 : 0;
    }
    if (round % 7 == 0) p[0] = 0.5;  // boundary counts as a trigger
    const auto c = confusion(p, y);
    const auto b = brute_counts(p, y, 0.5);
    CHECK(c.tp == static_cast<std::uint64_t>(b.tp));
    CHECK(c.fp == static_cast<std::uint64_t>(b.fp));
    CHECK(c.tn == static_cast<std::uint64_t>(b.tn));
    CHECK(c.fn == static_cast<std::uint64_t>(b.fn));

    const auto m = metrics(c);
    const double sens = ratio(b.tp, b.tp + b.fn);
    const double spec = ratio(b.tn, b.tn + b.fp);
    const double prec = ratio(b.tp, b.tp + b.fp);
    CHECK(std::abs(m.sensitivity - sens) <= 1e-12);
    CHECK(std::abs(m.specificity - spec) <= 1e-12);
    CHECK(std::abs(m.precision - prec) <= 1e-12);
    CHECK(std::abs(m.f1_std - ratio(2 * b.tp, 2 * b.tp + b.fp + b.fn)) <= 1e-12);
    CHECK(std::abs(m.f1_sens_spec - (sens + spec == 0 ? 0 : 2 * sens * spec / (sens + spec))) <= 1e-12);
  }
}

TEST_CASE("mask and threshold") {
  const std::vector<double> p{0.9, 0.2, 0.6, 0.4};
  const std::vector<int> y{1, 0, 0, 1};
  const std::vector<int> mask{1, 1, 0, 1};
  const auto c = confusion(p, y, 0.5, mask);
  CHECK(c == ConfusionCounts{1, 0, 1, 1});
  CHECK(confusion(p, y, 0.3) == ConfusionCounts{2, 1, 1, 0});
  const std::vector<int> short_gold{1};
  CHECK_THROWS_AS(confusion(p, short_gold), Error);
}

TEST_CASE("undefined ratios are zero and flagged") {
  const auto none = metrics(ConfusionCounts{0, 0, 10, 0});
  CHECK(none.sensitivity == 0);
  CHECK(none.precision == 0);
  CHECK(none.f1_std == 0);
  CHECK(none.specificity == 1);
  CHECK(none.has_undefined);
  CHECK_FALSE(metrics(ConfusionCounts{1, 1, 1, 1}).has_undefined);
  CHECK(metrics(ConfusionCounts{}).f1_sens_spec == 0);
}

TEST_CASE("harmonic mean of the reported sensitivity and specificity") {
  // Table value pair 0.706 / 0.928.
  CHECK(harmonic_mean(0.706, 0.928) == doctest::Approx(0.802).epsilon(5e-4));
  CHECK(harmonic_mean(0, 0) == 0);
  CHECK(f1_kind_from_string("sens-spec") == F1Kind::kSensSpec);
  CHECK(f1_kind_from_string(to_string(F1Kind::kStandard)) == F1Kind::kStandard);
  CHECK_THROWS_AS(f1_kind_from_string("macro"), UsageError);
}

TEST_CASE("confidence interval of a two-value sample") {
  const std::vector<double> x{0.1, 0.3};
  const auto ci = mean_ci(x);
  CHECK(ci.mean == doctest::Approx(0.2));
  CHECK(std::abs(ci.halfwidth - 1.271) <= 1e-3);
  CHECK(ci.halfwidth == doctest::Approx(12.7062047361747 * 0.1).epsilon(1e-9));
  CHECK_THROWS_AS(mean_ci(std::vector<double>{0.5}), Error);
  CHECK_THROWS_AS(mean_ci(x, 1.5), UsageError);
}

TEST_CASE("confidence interval values frozen from a reference implementation") {
  const std::vector<double> x{0.62, 0.71, 0.66, 0.69};
  CHECK(mean_ci(x).mean == doctest::Approx(0.67));
  CHECK(mean_ci(x).halfwidth == doctest::Approx(0.06230879862673237).epsilon(1e-9));
  CHECK(mean_ci(x, 0.90).halfwidth == doctest::Approx(0.04607626784184956).epsilon(1e-9));
}

TEST_CASE("half-width shrinks as one over root n for a repeated pattern") {
  // Repeating {0, 1} k times keeps the variance near 1/4; t approaches z.
  auto halfwidth = [](std::size_t k) {
    std::vector<double> v;
    for (std::size_t i = 0; i < k; ++i) {
      v.push_back(0);
      v.push_back(1);
    }
    return mean_ci(v).halfwidth;
  };
  const double h1 = halfwidth(2000);
  const double h4 = halfwidth(8000);
  CHECK(h1 / h4 == doctest::Approx(2.0).epsilon(2e-3));
}

TEST_CASE("t-test p-values frozen from a reference implementation") {
  const std::vector<double> a{0.61, 0.65, 0.58, 0.63, 0.60};
  const std::vector<double> b{0.70, 0.72, 0.69, 0.75, 0.71};
  CHECK(one_tailed_t_test(a, b) == doctest::Approx(0.00012925928210676783).epsilon(1e-8));
  CHECK(one_tailed_t_test(a, b, TTestKind::kStudent) == doctest::Approx(0.0001164678229491817).epsilon(1e-8));

  const std::vector<double> a2{0.5, 0.52, 0.47};
  const std::vector<double> b2{0.49, 0.55, 0.51, 0.60, 0.58, 0.53};
  CHECK(one_tailed_t_test(a2, b2) == doctest::Approx(0.03967883975251759).epsilon(1e-8));
  CHECK(one_tailed_t_test(b2, a2) == doctest::Approx(0.9603211602474824).epsilon(1e-8));
  CHECK(welch_df(a2, b2) == doctest::Approx(6.428940048082364).epsilon(1e-10));
}

TEST_CASE("one-tailed p-values of swapped samples sum to one") {
  Rng rng(77);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> a(2 + rng.below(9)), b(2 + rng.below(9));
    const double shift = rng.uniform(-0.2, 0.2);
    for (auto& v : a) v = rng.uniform(0.3, 0.8);
    for (auto& v : b) v = rng.uniform(0.3, 0.8) + shift;
    for (auto kind : {TTestKind::kWelch, TTestKind::kStudent}) {
      const double p = one_tailed_t_test(a, b, kind);
      const double q = one_tailed_t_test(b, a, kind);
      CHECK(p >= 0);
      CHECK(p <= 1);
      CHECK(std::abs(p + q - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("degenerate t-tests") {
  const std::vector<double> flat{0.5, 0.5};
  const std::vector<double> higher{0.7, 0.7};
  CHECK(one_tailed_t_test(flat, higher) == 0.0);
  CHECK(one_tailed_t_test(higher, flat) == 1.0);
  CHECK_THROWS_AS(one_tailed_t_test(flat, flat), Error);
  CHECK_THROWS_AS(one_tailed_t_test(std::vector<double>{1.0}, higher), Error);
}

TEST_CASE("sample moments") {
  const std::vector<double> x{1, 2, 3, 4};
  CHECK(sample_mean(x) == 2.5);
  CHECK(sample_variance(x) == doctest::Approx(5.0 / 3.0));
  CHECK_THROWS_AS(sample_mean(std::vector<double>{}), Error);
}
