#include <doctest.h>

#include <sstream>
#include <string>
#include <vector>

#include "oed/evalstats/report.hpp"

using namespace oed;
using namespace oed::evalstats;

namespace {

std::vector<ScoredTrial> three_variants() {
  return {
      {"a", "rnn <15> all", 0, 1, {8, 2, 80, 10}},  {"a", "rnn <15> all", 0, 2, {9, 3, 80, 8}},
      {"a", "rnn <15> all", 0, 3, {7, 1, 85, 7}},   {"b", "rnn <15> {B,S}", 1, 1, {12, 2, 80, 6}},
      {"b", "rnn <15> {B,S}", 1, 2, {11, 2, 80, 7}}, {"b", "rnn <15> {B,S}", 1, 3, {13, 3, 78, 6}},
      {"c", "svm rbf", 2, 1, {5, 5, 80, 10}},       {"c", "svm rbf", 2, 2, {6, 4, 82, 8}},
  };
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("rows follow variant order with per-seed means") {
  const auto trials = three_variants();
  const auto r = render_report(trials);
  REQUIRE(r.rows.size() == 3);
  CHECK(r.rows[0].variant == "a");
  CHECK(r.rows[2].variant == "c");
  CHECK(r.rows[0].seeds == 3);
  CHECK(r.rows[2].seeds == 2);
  // Per-seed F1 = 2tp / (2tp + fp + fn), then averaged.
  CHECK(r.rows[0].mean_f1 == doctest::Approx((16.0 / 28 + 18.0 / 29 + 14.0 / 22) / 3).epsilon(1e-12));
  CHECK(r.rows[0].mean_sensitivity == doctest::Approx(0.491285403050109).epsilon(1e-12));
  CHECK(r.rows[0].mean_specificity == doctest::Approx(0.9759457569358546).epsilon(1e-12));
  CHECK(r.best == 1);
  CHECK(r.rows[1].best);
  CHECK_FALSE(r.rows[1].p_value);
}

TEST_CASE("p-values and intervals frozen from a reference implementation") {
  const auto trials = three_variants();
  const auto r = render_report(trials);
  REQUIRE(r.rows[0].p_value);
  REQUIRE(r.rows[2].p_value);
  CHECK(*r.rows[0].p_value == doctest::Approx(0.004568642694615997).epsilon(1e-8));
  CHECK(*r.rows[2].p_value == doctest::Approx(0.0473260875872836).epsilon(1e-8));
  REQUIRE(r.rows[1].f1_ci_halfwidth);
  CHECK(*r.rows[1].f1_ci_halfwidth == doctest::Approx(0.053450587295141044).epsilon(1e-9));
  bool unequal = false;
  for (const auto& n : r.notes) unequal = unequal || n.find("unequal") != std::string::npos;
  CHECK(unequal);
}

TEST_CASE("csv layout") {
  const auto trials = three_variants();
  const auto csv = lines(to_csv(render_report(trials)));
  REQUIRE(csv.size() == 4);
  CHECK(csv[0] == "variant,split,mean_sens,mean_spec,mean_f1,f1_ci_halfwidth,p_value");
  CHECK(csv[2].substr(csv[2].rfind(',') + 1) == "---");
  CHECK(csv[1].rfind("a,test,0.491285,0.975946,", 0) == 0);
  std::size_t dashes = 0;
  for (const auto& l : csv) dashes += l.find("---") != std::string::npos;
  CHECK(dashes == 1);
}

TEST_CASE("single seeds give n/a cells and the text table lists every variant") {
  std::vector<ScoredTrial> t{{"x", "x", 0, 1, {1, 1, 1, 1}}, {"y", "y", 1, 1, {2, 0, 2, 0}}};
  const auto r = render_report(t, {"validation", F1Kind::kSensSpec});
  CHECK_FALSE(r.rows[0].f1_ci_halfwidth);
  CHECK_FALSE(r.rows[0].p_value);
  const auto csv = to_csv(r);
  CHECK(csv.find("x,validation,0.500000,0.500000,0.500000,n/a,n/a") != std::string::npos);
  const auto text = to_text(r);
  CHECK(text.find("split: validation") != std::string::npos);
  CHECK(text.find("sens-spec") != std::string::npos);
  CHECK(text.find("---") != std::string::npos);
}

TEST_CASE("ties keep the first variant as best") {
  std::vector<ScoredTrial> t{{"x", "x", 0, 1, {1, 1, 1, 1}}, {"y", "y", 1, 1, {1, 1, 1, 1}}};
  CHECK(render_report(t).best == 0);
}

TEST_CASE("constant identical samples leave the p-value undefined with a note") {
  std::vector<ScoredTrial> t{{"x", "x", 0, 1, {1, 1, 1, 1}}, {"x", "x", 0, 2, {1, 1, 1, 1}},
                             {"y", "y", 1, 1, {1, 1, 1, 1}}, {"y", "y", 1, 2, {1, 1, 1, 1}}};
  const auto r = render_report(t);
  CHECK_FALSE(r.rows[1].p_value);
  CHECK_FALSE(r.notes.empty());
  CHECK(to_csv(r).find("n/a") != std::string::npos);
}

TEST_CASE("zero-denominator ratios are noted") {
  std::vector<ScoredTrial> t{{"x", "x", 0, 1, {0, 0, 5, 0}}};
  const auto r = render_report(t);
  CHECK(r.rows[0].has_undefined);
  CHECK(r.notes.size() == 2);
}

TEST_CASE("bad report input") {
  CHECK_THROWS_AS(render_report(std::vector<ScoredTrial>{}), Error);
  std::vector<ScoredTrial> dup{{"x", "x", 0, 1, {1, 1, 1, 1}}, {"x", "x", 0, 1, {1, 1, 1, 1}}};
  CHECK_THROWS_AS(render_report(dup), Error);
}
