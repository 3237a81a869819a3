#include "oed/evalstats/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace oed::evalstats {

namespace {

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string ci_cell(const ReportRow& r) { return r.f1_ci_halfwidth ? fixed(*r.f1_ci_halfwidth) : "n/a"; }

std::string p_cell(const ReportRow& r) {
  if (r.best) return "---";
  return r.p_value ? fixed(*r.p_value) : "n/a";
}

}  // namespace

ComparisonReport render_report(std::span<const ScoredTrial> trials, const ReportOptions& options) {
  if (trials.empty()) throw Error("no trial results to report");
  struct Group {
    std::string label;
    std::size_t order;
    std::vector<MetricSet> per_seed;
    std::set<std::uint64_t> seeds;
  };
  std::map<std::string, Group> groups;
  for (const auto& t : trials) {
    auto [it, inserted] = groups.try_emplace(t.variant, Group{t.label, t.variant_order, {}, {}});
    if (!it->second.seeds.insert(t.seed).second) {
      throw Error("variant \"" + t.variant + "\" has two results for seed " + std::to_string(t.seed));
    }
    it->second.per_seed.push_back(metrics(t.counts));
  }
  std::vector<std::pair<std::string, Group*>> ordered;
  for (auto& [id, g] : groups) ordered.emplace_back(id, &g);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto& a, const auto& b) { return a.second->order < b.second->order; });

  ComparisonReport report;
  report.split = options.split;
  report.f1 = options.f1;
  std::vector<std::vector<double>> f1s;
  bool any_undefined = false;
  for (auto& [id, g] : ordered) {
    ReportRow row;
    row.variant = id;
    row.label = g->label;
    row.seeds = g->per_seed.size();
    std::vector<double> sens, spec, f1;
    for (const auto& m : g->per_seed) {
      sens.push_back(m.sensitivity);
      spec.push_back(m.specificity);
      f1.push_back(m.f1(options.f1));
      row.has_undefined = row.has_undefined || m.has_undefined;
    }
    any_undefined = any_undefined || row.has_undefined;
    row.mean_sensitivity = sample_mean(sens);
    row.mean_specificity = sample_mean(spec);
    row.mean_f1 = sample_mean(f1);
    if (f1.size() >= 2) row.f1_ci_halfwidth = mean_ci(f1, options.level).halfwidth;
    report.rows.push_back(row);
    f1s.push_back(std::move(f1));
  }

  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    if (report.rows[i].mean_f1 > report.rows[report.best].mean_f1) report.best = i;
  }
  report.rows[report.best].best = true;
  const auto& best_sample = f1s[report.best];
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    if (i == report.best) continue;
    if (f1s[i].size() < 2 || best_sample.size() < 2) continue;
    try {
      report.rows[i].p_value = one_tailed_t_test(f1s[i], best_sample, options.test);
    } catch (const Error&) {
      report.notes.push_back("p-value for " + report.rows[i].variant +
                             " is undefined: identical constant F1 values in both samples");
    }
  }

  std::set<std::size_t> counts;
  for (const auto& r : report.rows) counts.insert(r.seeds);
  if (counts.size() > 1) report.notes.push_back("warning: variants have unequal numbers of seeds");
  if (report.rows.size() == 1) report.notes.push_back("single variant: no significance tests");
  if (any_undefined) report.notes.push_back("some ratios were 0/0 and are counted as 0");
  return report;
}

std::string to_csv(const ComparisonReport& report) {
  std::ostringstream out;
  out << "variant,split,mean_sens,mean_spec,mean_f1,f1_ci_halfwidth,p_value\n";
  for (const auto& r : report.rows) {
    out << csv_field(r.variant) << ',' << csv_field(report.split) << ',' << fixed(r.mean_sensitivity) << ','
        << fixed(r.mean_specificity) << ',' << fixed(r.mean_f1) << ',' << ci_cell(r) << ',' << p_cell(r) << '\n';
  }
  return out.str();
}

std::string to_text(const ComparisonReport& report) {
  std::vector<std::vector<std::string>> cells{
      {"variant", "model", "seeds", "sens", "spec", "F1 (" + std::string(to_string(report.f1)) + ")", "F1 CI", "p-value"}};
  for (const auto& r : report.rows) {
    cells.push_back({r.variant, r.label, std::to_string(r.seeds), fixed(r.mean_sensitivity),
                     fixed(r.mean_specificity), fixed(r.mean_f1), ci_cell(r), p_cell(r)});
  }
  std::vector<std::size_t> width(cells[0].size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  out << "split: " << report.split << "\n";
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << row[c];
      if (c + 1 < row.size()) out << std::string(width[c] - row[c].size() + 2, ' ');
    }
    out << '\n';
  }
  for (const auto& n : report.notes) out << "* " << n << '\n';
  return out.str();
}

}  // namespace oed::evalstats
