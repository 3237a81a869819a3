#include <doctest.h>

#include <atomic>
#include <json.hpp>

#include "oed/annotator/service.hpp"
#include "oed/annotator/session.hpp"
#include "synthetic.hpp"

using namespace oed;
using namespace oed::annotator;
using nlohmann::json;

namespace {

class ConstantModel final : public SuggestionModel {
 public:
  explicit ConstantModel(double p) : p_(p) {}
  std::vector<double> suggest(const corpus::Sentence& s) const override { return std::vector<double>(s.size(), p_); }

 private:
  double p_;
};

struct StubRetrainer {
  std::shared_ptr<std::atomic<int>> calls = std::make_shared<std::atomic<int>>(0);
  std::shared_ptr<std::vector<std::size_t>> pool_sizes = std::make_shared<std::vector<std::size_t>>();

  Retrainer get() const {
    auto c = calls;
    auto sizes = pool_sizes;
    return [c, sizes](const RetrainRequest& r) -> std::shared_ptr<const SuggestionModel> {
      sizes->push_back(r.pool.size());
      ++*c;
      return std::make_shared<ConstantModel>(0.75);
    };
  }
};

struct ManualClock {
  std::shared_ptr<std::chrono::steady_clock::time_point> now =
      std::make_shared<std::chrono::steady_clock::time_point>(std::chrono::steady_clock::time_point{});
  Clock get() const {
    auto n = now;
    return [n] { return *n; };
  }
  void advance(std::chrono::seconds s) const { *now += s; }
};

std::vector<int> gold(const corpus::Sentence& s) {
  std::vector<int> out;
  for (const auto& t : s.tokens) out.push_back(t.is_trigger() ? 1 : 0);
  return out;
}

SentenceTask take(AnnotationSession& s) {
  auto next = s.next_task();
  REQUIRE(std::holds_alternative<SentenceTask>(next));
  return std::get<SentenceTask>(next);
}

void expect_code(AnnotationSession& s, const LabelSubmission& sub, const std::string& code) {
  try {
    s.submit(sub);
    FAIL("expected " << code);
  } catch (const SessionError& e) {
    CHECK(e.code() == code);
  }
}

}  // namespace

TEST_CASE("cold start offers no suggestions, later tasks carry the model's") {
  StubRetrainer stub;
  SessionOptions o;
  o.batch_trigger = 3;
  AnnotationSession s("a", testing::separable_dataset(8, 1), o, stub.get());
  for (int i = 0; i < 3; ++i) {
    auto t = take(s);
    CHECK_FALSE(t.suggestions);
    s.submit({t.token, gold(t.sentence), "r"});
  }
  s.wait_idle();
  CHECK(*stub.calls == 1);
  auto t = take(s);
  REQUIRE(t.suggestions);
  CHECK(t.suggestions->size() == t.sentence.size());
  CHECK(t.suggestions->front() == 0.75);
  CHECK(s.status().has_model);
}

TEST_CASE("blind mode never shows suggestions") {
  StubRetrainer stub;
  SessionOptions o;
  o.mode = Mode::kBlind;
  o.batch_trigger = 2;
  AnnotationSession s("b", testing::separable_dataset(10, 2), o, stub.get());
  for (int i = 0; i < 10; ++i) {
    auto t = take(s);
    CHECK_FALSE(t.suggestions);
    s.submit({t.token, gold(t.sentence), "r"});
    s.wait_idle();
  }
  CHECK(*stub.calls == 5);
  CHECK(std::holds_alternative<SessionComplete>(s.next_task()));
}

TEST_CASE("retraining starts exactly at every batch boundary") {
  StubRetrainer stub;
  AnnotationSession s("c", testing::separable_dataset(130, 3), SessionOptions{}, stub.get());
  std::vector<SubmitStatus> statuses;
  for (int i = 0; i < 120; ++i) {
    auto t = take(s);
    const auto r = s.submit({t.token, gold(t.sentence), "r"});
    statuses.push_back(r.status);
    if (i == 48) {
      s.wait_idle();
      CHECK(*stub.calls == 0);
      CHECK(s.status().since_last_retrain == 49);
    }
  }
  s.wait_idle();
  CHECK(*stub.calls == 2);
  CHECK(statuses[49] == SubmitStatus::kRetrainStarted);
  CHECK(statuses[99] == SubmitStatus::kRetrainStarted);
  CHECK(statuses[50] == SubmitStatus::kCommitted);
  CHECK(*stub.pool_sizes == std::vector<std::size_t>{50, 100});
  const auto st = s.status();
  CHECK(st.retrains_started == 2);
  CHECK(st.retrains_completed == 2);
  CHECK(st.committed == 120);
  CHECK(st.since_last_retrain == 20);
}

TEST_CASE("a failing retrain is recorded and the session keeps going") {
  SessionOptions o;
  o.batch_trigger = 1;
  AnnotationSession s("f", testing::separable_dataset(3, 4), o,
                      [](const RetrainRequest&) -> std::shared_ptr<const SuggestionModel> { throw Error("boom"); });
  auto t = take(s);
  s.submit({t.token, gold(t.sentence), "r"});
  s.wait_idle();
  const auto st = s.status();
  CHECK(st.retrains_failed == 1);
  CHECK(st.last_error.find("boom") != std::string::npos);
  CHECK_FALSE(st.has_model);
  auto u = take(s);
  CHECK_FALSE(u.suggestions);
}

TEST_CASE("two reviewers must agree before a commit") {
  StubRetrainer stub;
  SessionOptions o;
  o.reviewers_required = 2;
  AnnotationSession s("d", testing::separable_dataset(4, 5), o, stub.get());
  auto a = take(s);
  auto b = take(s);
  CHECK(a.sentence.id == b.sentence.id);
  CHECK(s.submit({a.token, gold(a.sentence), "ann"}).status == SubmitStatus::kAwaitingConsensus);
  auto dup = take(s);
  CHECK(dup.sentence.id != a.sentence.id);
  const auto r = s.submit({b.token, gold(b.sentence), "bob"});
  CHECK(r.status == SubmitStatus::kCommitted);
  CHECK(r.committed == 1);
}

TEST_CASE("conflicting labels send the sentence back to the front for rereview") {
  StubRetrainer stub;
  SessionOptions o;
  o.reviewers_required = 2;
  AnnotationSession s("e", testing::separable_dataset(4, 6), o, stub.get());
  auto a = take(s);
  auto b = take(s);
  auto flipped = gold(b.sentence);
  flipped[0] = 1 - flipped[0];
  s.submit({a.token, gold(a.sentence), "ann"});
  CHECK(s.submit({b.token, flipped, "bob"}).status == SubmitStatus::kRequeued);
  CHECK(s.status().committed == 0);
  auto again = take(s);
  CHECK(again.sentence.id == a.sentence.id);
  CHECK(again.rereview);
  // The earlier reviewers may label it again.
  auto again2 = take(s);
  CHECK(again2.sentence.id == a.sentence.id);
  s.submit({again.token, gold(again.sentence), "ann"});
  CHECK(s.submit({again2.token, gold(again2.sentence), "bob"}).status == SubmitStatus::kCommitted);
  auto next = take(s);
  CHECK_FALSE(next.rereview);
}

TEST_CASE("token errors") {
  StubRetrainer stub;
  ManualClock clock;
  SessionOptions o;
  o.token_ttl = std::chrono::seconds(60);
  o.reviewers_required = 2;
  AnnotationSession s("g", testing::separable_dataset(4, 7), o, stub.get(), clock.get());

  expect_code(s, {"nope", {}, "r"}, "invalid_token");

  auto t = take(s);
  auto labels = gold(t.sentence);
  expect_code(s, {t.token, std::vector<int>(labels.size() + 1, 0), "r"}, "label_length");
  auto bad = labels;
  bad[0] = 2;
  expect_code(s, {t.token, bad, "r"}, "bad_label");
  s.submit({t.token, labels, "r"});
  expect_code(s, {t.token, labels, "r"}, "token_replay");

  auto u = take(s);
  CHECK(u.sentence.id == t.sentence.id);
  expect_code(s, {u.token, labels, "r"}, "duplicate_reviewer");

  clock.advance(std::chrono::seconds(61));
  expect_code(s, {u.token, labels, "other"}, "token_expired");
  // Still expired after the sweep, and the sentence is handed out again.
  auto v = take(s);
  CHECK(v.sentence.id == t.sentence.id);
  expect_code(s, {u.token, labels, "other"}, "token_expired");
  CHECK(s.submit({v.token, labels, "other"}).status == SubmitStatus::kCommitted);
}

TEST_CASE("session completes once every sentence is committed") {
  StubRetrainer stub;
  AnnotationSession s("h", testing::separable_dataset(2, 8), SessionOptions{}, stub.get());
  auto a = take(s);
  auto b = take(s);
  auto done = s.next_task();
  REQUIRE(std::holds_alternative<SessionComplete>(done));
  CHECK(std::get<SessionComplete>(done).pending == 2);
  s.submit({a.token, gold(a.sentence), "r"});
  s.submit({b.token, gold(b.sentence), "r"});
  CHECK(std::get<SessionComplete>(s.next_task()).pending == 0);
  CHECK(s.status().complete);
}

TEST_CASE("export round-trips through the dataset reader in commit order") {
  StubRetrainer stub;
  SessionOptions o;
  o.shuffle_seed = 9;
  const auto data = testing::separable_dataset(6, 9);
  AnnotationSession s("i", data, o, stub.get());
  CHECK(s.export_jsonl().empty());
  std::vector<std::string> order;
  for (int i = 0; i < 4; ++i) {
    auto t = take(s);
    auto labels = std::vector<int>(t.sentence.size(), 0);
    labels.back() = 1;
    s.submit({t.token, labels, "r"});
    order.push_back(t.sentence.id);
  }
  const auto back = corpus::parse_dataset(s.export_jsonl());
  REQUIRE(back.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(back.sentences[i].id == order[i]);
    CHECK(back.sentences[i].tokens.back().is_trigger());
    CHECK_FALSE(back.sentences[i].tokens.front().is_trigger());
  }
}

TEST_CASE("bad session options") {
  StubRetrainer stub;
  SessionOptions o;
  o.reviewers_required = 0;
  CHECK_THROWS_AS(AnnotationSession("x", testing::separable_dataset(2, 1), o, stub.get()), UsageError);
  o = {};
  o.batch_trigger = 0;
  CHECK_THROWS_AS(AnnotationSession("x", testing::separable_dataset(2, 1), o, stub.get()), UsageError);
  CHECK_THROWS_AS(mode_from_string("half"), UsageError);
}

TEST_CASE("service routes and status codes") {
  StubRetrainer stub;
  AnnotationService::Options so;
  so.retrainer = [stub](const corpus::Dataset&) { return stub.get(); };
  AnnotationService svc(so);
  testing::TempDir dir;
  const auto path = dir / "pool.jsonl";
  testing::write_file(path, corpus::to_jsonl(testing::separable_dataset(5, 10)));

  CHECK(svc.handle("GET", "/nowhere", "").status == 404);
  CHECK(svc.handle("GET", "/sessions", "").status == 405);
  CHECK(svc.handle("POST", "/sessions", "{").status == 400);
  CHECK(svc.handle("POST", "/sessions", R"({"mode":"blind"})").status == 400);
  CHECK(svc.handle("POST", "/sessions", json{{"dataset", path.string()}, {"colour", 1}}.dump()).status == 400);
  const auto missing = svc.handle("POST", "/sessions", json{{"dataset", (dir / "none.jsonl").string()}}.dump());
  CHECK(missing.status == 400);
  CHECK(json::parse(missing.body)["error"] == "bad_dataset");

  const auto created = svc.handle("POST", "/sessions", json{{"dataset", path.string()}, {"batch_trigger", 2}}.dump());
  REQUIRE(created.status == 201);
  const auto cj = json::parse(created.body);
  const std::string id = cj["id"];
  CHECK(cj["total"] == 5);
  CHECK(svc.handle("GET", "/sessions/zzz/next", "").status == 404);
  CHECK(svc.handle("POST", "/sessions/" + id + "/next", "").status == 405);
  CHECK(svc.handle("GET", "/sessions/" + id + "/submit", "").status == 405);
  CHECK(svc.handle("GET", "/sessions/" + id + "/dance", "").status == 404);

  const auto next = json::parse(svc.handle("GET", "/sessions/" + id + "/next", "").body);
  CHECK(next["status"] == "task");
  CHECK_FALSE(next.contains("suggestions"));
  const std::string token = next["task_token"];
  const std::size_t n = next["sentence"]["tokens"].size();
  const std::string sub = json{{"task_token", token}, {"labels", std::vector<int>(n, 0)}, {"reviewer", "r"}}.dump();
  CHECK(svc.handle("POST", "/sessions/" + id + "/submit", R"({"labels":[]})").status == 400);
  const auto bad_len =
      svc.handle("POST", "/sessions/" + id + "/submit", json{{"task_token", token}, {"labels", {0}}}.dump());
  CHECK(bad_len.status == 400);
  CHECK(json::parse(bad_len.body)["error"] == "label_length");
  const auto ok = svc.handle("POST", "/sessions/" + id + "/submit", sub);
  CHECK(ok.status == 200);
  CHECK(json::parse(ok.body)["status"] == "committed");
  const auto replay = svc.handle("POST", "/sessions/" + id + "/submit", sub);
  CHECK(replay.status == 409);
  CHECK(json::parse(replay.body)["error"] == "token_replay");

  const auto st = json::parse(svc.handle("GET", "/sessions/" + id + "/status", "").body);
  CHECK(st["committed"] == 1);
  CHECK(st["until_next_retrain"] == 1);
  CHECK(st["mode"] == "assisted");
  const auto exported = svc.handle("GET", "/sessions/" + id + "/export", "");
  CHECK(exported.status == 200);
  CHECK(corpus::parse_dataset(exported.body).size() == 1);
}

TEST_CASE("expired tokens map to 410") {
  StubRetrainer stub;
  ManualClock clock;
  AnnotationService::Options so;
  so.retrainer = [stub](const corpus::Dataset&) { return stub.get(); };
  so.clock = clock.get();
  AnnotationService svc(so);
  SessionOptions o;
  o.token_ttl = std::chrono::seconds(5);
  const auto id = svc.create_session(testing::separable_dataset(2, 11), o);
  const auto next = json::parse(svc.handle("GET", "/sessions/" + id + "/next", "").body);
  clock.advance(std::chrono::seconds(5));
  const std::size_t n = next["sentence"]["tokens"].size();
  const auto r = svc.handle("POST", "/sessions/" + id + "/submit",
                            json{{"task_token", next["task_token"]}, {"labels", std::vector<int>(n, 0)}}.dump());
  CHECK(r.status == 410);
}
