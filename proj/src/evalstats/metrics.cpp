#include "oed/evalstats/metrics.hpp"

#include <string>

namespace oed::evalstats {

ConfusionCounts confusion(std::span<const double> predictions, std::span<const int> gold,
                          double threshold, std::span<const int> mask) {
  if (predictions.size() != gold.size()) {
    throw Error("confusion: " + std::to_string(predictions.size()) + " predictions for " +
                std::to_string(gold.size()) + " gold labels");
  }
  if (!mask.empty() && mask.size() != gold.size()) throw Error("confusion: mask length mismatch");
  ConfusionCounts c;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (!mask.empty() && mask[i] == 0) continue;
    const bool predicted = predictions[i] >= threshold;
    const bool actual = gold[i] != 0;
    if (predicted && actual) ++c.tp;
    else if (predicted) ++c.fp;
    else if (actual) ++c.fn;
    else ++c.tn;
  }
  return c;
}

std::string_view to_string(F1Kind kind) { return kind == F1Kind::kStandard ? "std" : "sens-spec"; }

F1Kind f1_kind_from_string(std::string_view name) {
  if (name == "std" || name == "standard") return F1Kind::kStandard;
  if (name == "sens-spec" || name == "sens_spec") return F1Kind::kSensSpec;
  throw UsageError("unknown F1 kind \"" + std::string(name) + "\" (expected std or sens-spec)");
}

double harmonic_mean(double a, double b) { return a + b == 0.0 ? 0.0 : 2.0 * a * b / (a + b); }

MetricSet metrics(const ConfusionCounts& c) {
  MetricSet m;
  auto ratio = [&m](std::uint64_t num, std::uint64_t den) {
    if (den == 0) {
      m.has_undefined = true;
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
  };
  m.sensitivity = ratio(c.tp, c.tp + c.fn);
  m.specificity = ratio(c.tn, c.tn + c.fp);
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.f1_std = harmonic_mean(m.precision, m.sensitivity);
  m.f1_sens_spec = harmonic_mean(m.sensitivity, m.specificity);
  return m;
}

}  // namespace oed::evalstats
