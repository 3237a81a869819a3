#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oed/evalstats/metrics.hpp"
#include "oed/evalstats/statistics.hpp"

namespace oed::evalstats {

/// Confusion counts of one trial on the split being compared.
struct ScoredTrial {
  std::string variant;
  std::string label;
  std::size_t variant_order = 0;
  std::uint64_t seed = 0;
  ConfusionCounts counts;
};

struct ReportOptions {
  std::string split = "test";
  F1Kind f1 = F1Kind::kStandard;
  TTestKind test = TTestKind::kWelch;
  double level = 0.95;
};

struct ReportRow {
  std::string variant;
  std::string label;
  std::size_t seeds = 0;
  double mean_sensitivity = 0;
  double mean_specificity = 0;
  double mean_f1 = 0;
  std::optional<double> f1_ci_halfwidth;  // absent with fewer than two seeds
  std::optional<double> p_value;          // absent for the best row or when undefined
  bool best = false;
  bool has_undefined = false;
};

struct ComparisonReport {
  std::string split;
  F1Kind f1 = F1Kind::kStandard;
  std::vector<ReportRow> rows;
  std::size_t best = 0;
  std::vector<std::string> notes;
};

/// One row per variant with metrics averaged over seeds, the CI half-width of
/// the F1 and the one-tailed p-value against the variant with the highest
/// mean F1. Throws Error on empty input.
ComparisonReport render_report(std::span<const ScoredTrial> trials, const ReportOptions& options = {});

/// Columns: variant, split, mean_sens, mean_spec, mean_f1, f1_ci_halfwidth,
/// p_value. The best row's p-value is "---"; undefined cells are "n/a".
std::string to_csv(const ComparisonReport& report);
/// Aligned plain-text table followed by the notes.
std::string to_text(const ComparisonReport& report);

}  // namespace oed::evalstats
