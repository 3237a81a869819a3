#include <doctest.h>

#include <filesystem>

#include "oed/common/rng.hpp"
#include "oed/models/classifier.hpp"
#include "oed/models/factory.hpp"
#include "oed/trainer/experiment.hpp"
#include "oed/trainer/trial.hpp"
#include "synthetic.hpp"

using namespace oed;
using namespace oed::trainer;
using featurize::FeatureKind;
using featurize::FeaturizedSentence;
namespace fs = std::filesystem;

namespace {

// Validation F1 per epoch comes from a fixed script: on a 20-token sentence
// with 10 gold triggers, predicting k true and 10 - k false positives gives
// F1 = 2k / (2k + (10 - k) + (10 - k)) = k / 10.
class ScriptedClassifier final : public models::TokenClassifier {
 public:
  explicit ScriptedClassifier(std::vector<int> hits) : hits_(std::move(hits)) {}

  std::string family() const override { return "scripted"; }
  featurize::FeatureSet features() const override { return {FeatureKind::W}; }
  std::vector<double> predict_proba(const FeaturizedSentence& s) const override {
    std::vector<double> p(s.size(), 0.0);
    if (epoch_ == 0 || s.size() != 20) return p;
    const int k = hits_[static_cast<std::size_t>(std::min<int>(epoch_, static_cast<int>(hits_.size())) - 1)];
    for (int i = 0; i < k; ++i) p[static_cast<std::size_t>(i)] = 1.0;
    for (int i = 0; i < 10 - k; ++i) p[static_cast<std::size_t>(10 + i)] = 1.0;
    return p;
  }
  using TokenClassifier::predict_proba;
  double train_epoch(std::span<const FeaturizedSentence>, Rng&) override {
    ++epoch_;
    ++calls_;
    return 0.5;
  }
  std::string serialize() const override { return std::to_string(epoch_); }
  void deserialize(std::string_view blob) override { epoch_ = std::stoi(std::string(blob)); }
  std::string config_json() const override { return "{}"; }

  int epoch_ = 0;
  int calls_ = 0;

 private:
  std::vector<int> hits_;
};

FeaturizedSentence scripted_validation() {
  FeaturizedSentence s;
  s.id = "v";
  s.tokens.resize(20);
  s.labels.assign(20, 0);
  for (int i = 0; i < 10; ++i) s.labels[static_cast<std::size_t>(i)] = 1;
  return s;
}

corpus::Corpus small_corpus() {
  corpus::Corpus c;
  c.trainval = oed::testing::separable_dataset(15, 21);
  c.test = oed::testing::separable_dataset(5, 22);
  c.test.partition = corpus::Partition::kTest;
  for (auto& s : c.test.sentences) s.id = "t" + s.id;
  return c;
}

models::RnnConfig rnn(const std::string& features, std::vector<int> units = {3}) {
  models::RnnConfig r;
  r.features = features;
  r.hidden_units = std::move(units);
  return r;
}

TrialConfig quick_trial(std::uint64_t seed) {
  TrialConfig t;
  t.model = rnn("{W,P}");
  t.seed = seed;
  t.stop = {2, 6, 1e-6};
  return t;
}

ExperimentConfig quick_experiment() {
  ExperimentConfig cfg;
  cfg.name = "unit";
  cfg.variants = {{"w", rnn("{W}", {2})}, {"p", rnn("{P}", {2})}};
  cfg.seeds = {1, 2};
  cfg.stop = {1, 3, 1e-6};
  return cfg;
}

}  // namespace

TEST_CASE("patience bookkeeping on a scripted score trace") {
  const std::vector<double> trace{0.1, 0.3, 0.2, 0.2, 0.2};
  std::vector<int> improved;
  const auto out = models::run_with_early_stopping(
      {2, 100, 1e-6}, [&](int epoch) { return trace.at(static_cast<std::size_t>(epoch - 1)); },
      [&](int epoch) { improved.push_back(epoch); });
  CHECK(out.stopped_epoch == 5);
  CHECK(out.best_epoch == 2);
  CHECK(out.best_score == 0.3);
  CHECK(improved == std::vector<int>{1, 2});
}

TEST_CASE("max epochs and the improvement margin") {
  const auto capped = models::run_with_early_stopping({10, 4, 1e-6}, [](int e) { return 0.1 * e; });
  CHECK(capped.stopped_epoch == 4);
  CHECK(capped.best_epoch == 4);
  const auto flat = models::run_with_early_stopping({1, 50, 1e-6}, [](int e) { return 0.5 + 1e-9 * e; });
  CHECK(flat.best_epoch == 1);
  CHECK(flat.stopped_epoch == 3);
}

TEST_CASE("fit stops on the scripted trace and restores the best epoch") {
  ScriptedClassifier c({1, 3, 2, 2, 2, 2, 2});
  const std::vector<FeaturizedSentence> val{scripted_validation()};
  Rng rng(1);
  const auto trace = c.fit({}, val, {2, 100, 1e-6}, rng);
  REQUIRE(trace.epochs.size() == 5);
  CHECK(trace.epochs[0].validation_score == doctest::Approx(0.1));
  CHECK(trace.epochs[1].validation_score == doctest::Approx(0.3));
  CHECK(trace.epochs[4].validation_score == doctest::Approx(0.2));
  CHECK(trace.stopped_epoch == 5);
  CHECK(trace.best_epoch == 2);
  CHECK(c.calls_ == 5);
  CHECK(c.epoch_ == 2);
  CHECK(c.fitted());
}

TEST_CASE("trial results are bit-identical for the same seed") {
  const auto store = oed::testing::make_store(small_corpus(), {FeatureKind::W, FeatureKind::P});
  const auto a = run_trial(quick_trial(3), store);
  const auto b = run_trial(quick_trial(3), store);
  CHECK(a.result == b.result);
  CHECK(to_json(a.result) == to_json(b.result));
  CHECK(a.result.wall_seconds == 0);
  CHECK(a.model->serialize() == b.model->serialize());
  CHECK_NOTHROW(check_result(a.result, &store));
  std::size_t tokens = 0;
  for (const auto& s : store.trainval) tokens += s.size();
  CHECK(a.result.train.total() + a.result.validation.total() == tokens);
}

TEST_CASE("different seeds give independent trials") {
  const auto store = oed::testing::make_store(small_corpus(), {FeatureKind::W, FeatureKind::P});
  const auto a = run_trial(quick_trial(1), store);
  const auto b = run_trial(quick_trial(2), store);
  CHECK(a.model->serialize() != b.model->serialize());
  // Running seed 1 after seed 2 changes nothing about seed 1.
  const auto a2 = run_trial(quick_trial(1), store);
  CHECK(a.result == a2.result);

  auto fixed1 = quick_trial(1);
  auto fixed2 = quick_trial(2);
  fixed1.fixed_split = fixed2.fixed_split = true;
  const auto f1 = run_trial(fixed1, store);
  const auto f2 = run_trial(fixed2, store);
  CHECK(f1.result.validation.total() == f2.result.validation.total());
}

TEST_CASE("trial records round-trip through json") {
  TrialResult r;
  r.variant_id = "v2";
  r.variant_index = 1;
  r.variant_label = "rnn <15> all";
  r.family = "rnn";
  r.features = "{W,P,T,D,E,Sp,B,S}";
  r.seed = 4;
  r.best_epoch = 7;
  r.stopped_epoch = 408;
  r.best_validation_f1 = 0.123456789012345;
  r.train = {1, 2, 3, 4};
  r.validation = {5, 6, 7, 8};
  r.test = {9, 10, 11, 12};
  CHECK(trial_result_from_json(to_json(r)) == r);
  r.status = TrialStatus::kFailed;
  r.error = "diverged";
  CHECK(trial_result_from_json(to_json(r)) == r);
  CHECK_THROWS(trial_result_from_json("{}"));

  TrialResult bad = r;
  bad.status = TrialStatus::kOk;
  bad.best_epoch = 9;
  bad.stopped_epoch = 3;
  CHECK_THROWS_AS(check_result(bad), Error);
}

static ExperimentConfig with_data(const oed::testing::TempDir& dir) {
  auto cfg = quick_experiment();
  const auto c = small_corpus();
  corpus::save_dataset(c.trainval, dir / "trainval.jsonl");
  corpus::save_dataset(c.test, dir / "test.jsonl");
  cfg.trainval = dir / "trainval.jsonl";
  cfg.test = dir / "test.jsonl";
  return cfg;
}

TEST_CASE("experiment writes one record per variant and seed") {
  oed::testing::TempDir dir;
  const auto cfg = with_data(dir);
  const auto out = dir / "run";
  std::vector<std::string> seen;
  RunOptions opts;
  opts.on_result = [&](const TrialResult& r) { seen.push_back(r.variant_id + std::to_string(r.seed)); };
  const auto summary = run_experiment(cfg, out, opts);
  CHECK(summary.executed == 4);
  CHECK(summary.failed == 0);
  CHECK(seen.size() == 4);
  for (const auto& v : cfg.variants) {
    for (auto seed : cfg.seeds) CHECK(fs::exists(out / trial_file_name(v.id, seed)));
  }
  CHECK(fs::exists(out / "experiment.json"));
  const auto loaded = load_results(out);
  REQUIRE(loaded.size() == 4);
  CHECK(loaded[0].variant_id == "w");
  CHECK(loaded[0].seed == 1);
  CHECK(loaded[3].variant_id == "p");
  CHECK(loaded == summary.results);
}

TEST_CASE("resume runs only the missing trials") {
  oed::testing::TempDir dir;
  const auto cfg = with_data(dir);
  const auto out = dir / "run";
  RunOptions stop_early;
  stop_early.max_trials = 3;
  const auto first = run_experiment(cfg, out, stop_early);
  CHECK(first.executed == 3);
  const auto resumed = resume_experiment(out, cfg);
  CHECK(resumed.executed == 1);
  CHECK(resumed.skipped == 3);
  CHECK(resumed.results.size() == 4);
  const auto again = resume_experiment(out, cfg);
  CHECK(again.executed == 0);

  // A fresh uninterrupted run produces the same records.
  const auto clean = run_experiment(cfg, dir / "clean");
  CHECK(clean.results == load_results(out));
}

TEST_CASE("config hash guards the output directory") {
  oed::testing::TempDir dir;
  auto cfg = with_data(dir);
  cfg.seeds = {1};
  cfg.variants.resize(1);
  const auto out = dir / "run";
  run_experiment(cfg, out);
  auto other = cfg;
  other.variants[0].id = "renamed";
  CHECK_THROWS_AS(run_experiment(other, out), Error);
  CHECK_THROWS_AS(resume_experiment(out, other), UsageError);
  CHECK_THROWS_AS(resume_experiment(dir / "nowhere", cfg), UsageError);
}

TEST_CASE("a failing trial is recorded and the rest continue") {
  oed::testing::TempDir dir;
  const auto cfg = with_data(dir);
  RunOptions opts;
  opts.factory = [](const models::ModelConfig& m, const featurize::FeatureContext& ctx,
                    std::uint64_t seed) -> std::unique_ptr<models::TokenClassifier> {
    if (seed == 2) throw models::DivergenceError("loss is not finite");
    return models::make_classifier(m, ctx, seed);
  };
  const auto summary = run_experiment(cfg, dir / "run", opts);
  CHECK(summary.executed == 4);
  CHECK(summary.failed == 2);
  std::size_t failed = 0;
  for (const auto& r : summary.results) {
    if (!r.ok()) {
      ++failed;
      CHECK(r.seed == 2);
      CHECK(r.error.find("not finite") != std::string::npos);
    }
  }
  CHECK(failed == 2);
  // Resume retries the failed ones.
  const auto resumed = resume_experiment(dir / "run", cfg);
  CHECK(resumed.executed == 2);
  CHECK(resumed.failed == 0);
}

TEST_CASE("parallel trials match the sequential run") {
  oed::testing::TempDir dir;
  auto cfg = with_data(dir);
  const auto seq = run_experiment(cfg, dir / "seq");
  cfg.jobs = 2;
  const auto par = run_experiment(cfg, dir / "par");
  CHECK(seq.results == par.results);
}

TEST_CASE("experiment config validation") {
  auto cfg = quick_experiment();
  CHECK_NOTHROW(cfg.validate());
  cfg.seeds = {2, 3, 4};
  CHECK_NOTHROW(cfg.validate());
  cfg.seeds = {1, 3};
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  cfg.seeds = {0, 1};
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  cfg = quick_experiment();
  cfg.variants[1].id = "w";
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  cfg.variants[1].id = "../x";
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  cfg.variants.clear();
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  CHECK(quick_experiment().required_features() == featurize::FeatureSet{FeatureKind::W, FeatureKind::P});
  const auto t = quick_experiment().trial(1, 2);
  CHECK(t.variant_id == "p");
  CHECK(t.seed == 2);
  CHECK(t.stop.max_epochs == 3);
}
