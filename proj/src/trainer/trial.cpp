#include "oed/trainer/trial.hpp"

#include <chrono>

#include <json.hpp>

#include "oed/models/factory.hpp"

namespace oed::trainer {

using nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kTrainStream = 0x545241494e;  // "TRAIN"

ordered_json counts_json(const evalstats::ConfusionCounts& c) {
  return {{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}};
}

evalstats::ConfusionCounts counts_from(const ordered_json& j) {
  return {j.at("tp").get<std::uint64_t>(), j.at("fp").get<std::uint64_t>(), j.at("tn").get<std::uint64_t>(),
          j.at("fn").get<std::uint64_t>()};
}

std::size_t token_total(const std::vector<featurize::FeaturizedSentence>& data) {
  std::size_t n = 0;
  for (const auto& s : data) n += s.size();
  return n;
}

}  // namespace

FeatureStore build_feature_store(const corpus::Corpus& corpus, const featurize::Featurizer& featurizer,
                                 featurize::FeatureSet kinds) {
  FeatureStore store;
  store.context = featurizer.context();
  store.kinds = kinds;
  store.trainval = featurizer.featurize(corpus.trainval, kinds);
  store.test = featurizer.featurize(corpus.test, kinds);
  return store;
}

std::string to_json(const TrialResult& r) {
  ordered_json j;
  j["variant_id"] = r.variant_id;
  j["variant_index"] = r.variant_index;
  j["variant_label"] = r.variant_label;
  j["family"] = r.family;
  j["features"] = r.features;
  j["seed"] = r.seed;
  j["status"] = r.ok() ? "ok" : "failed";
  j["error"] = r.error;
  j["best_epoch"] = r.best_epoch;
  j["stopped_epoch"] = r.stopped_epoch;
  j["best_validation_f1"] = r.best_validation_f1;
  j["monitor"] = r.monitor;
  j["train"] = counts_json(r.train);
  j["validation"] = counts_json(r.validation);
  j["test"] = counts_json(r.test);
  j["wall_seconds"] = r.wall_seconds;
  return j.dump(2) + "\n";
}

TrialResult trial_result_from_json(const std::string& text) {
  try {
    const auto j = ordered_json::parse(text);
    TrialResult r;
    r.variant_id = j.at("variant_id").get<std::string>();
    r.variant_index = j.at("variant_index").get<std::size_t>();
    r.variant_label = j.at("variant_label").get<std::string>();
    r.family = j.at("family").get<std::string>();
    r.features = j.at("features").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    const auto status = j.at("status").get<std::string>();
    if (status != "ok" && status != "failed") throw Error("unknown trial status \"" + status + "\"");
    r.status = status == "ok" ? TrialStatus::kOk : TrialStatus::kFailed;
    r.error = j.at("error").get<std::string>();
    r.best_epoch = j.at("best_epoch").get<int>();
    r.stopped_epoch = j.at("stopped_epoch").get<int>();
    r.best_validation_f1 = j.at("best_validation_f1").get<double>();
    r.monitor = j.at("monitor").get<std::string>();
    r.train = counts_from(j.at("train"));
    r.validation = counts_from(j.at("validation"));
    r.test = counts_from(j.at("test"));
    r.wall_seconds = j.at("wall_seconds").get<double>();
    return r;
  } catch (const ordered_json::exception& e) {
    throw Error(std::string("malformed trial record: ") + e.what());
  }
}

void check_result(const TrialResult& r, const FeatureStore* store) {
  if (!r.ok()) return;
  if (r.best_epoch > r.stopped_epoch) throw Error("best epoch after the stopping epoch");
  if (r.best_validation_f1 < 0 || r.best_validation_f1 > 1) throw Error("validation F1 outside [0, 1]");
  if (store) {
    if (r.test.total() != token_total(store->test)) throw Error("test counts do not cover the test partition");
    if (r.train.total() + r.validation.total() != token_total(store->trainval)) {
      throw Error("train and validation counts do not cover trainval");
    }
  }
}

TrialOutcome run_trial(const TrialConfig& cfg, const FeatureStore& store, const ClassifierFactory& factory) {
  const auto started = std::chrono::steady_clock::now();
  models::validate(cfg.model);
  const auto needed = models::feature_set(cfg.model);
  if (!(needed - store.kinds).empty()) {
    throw UsageError("feature store lacks " + (needed - store.kinds).to_string() + " needed by " +
                     models::describe(cfg.model));
  }

  const corpus::SplitSpec spec{cfg.fixed_split ? cfg.split_seed : cfg.seed, cfg.validation_fraction};
  const auto idx = corpus::split_indices(store.trainval.size(), spec);
  std::vector<featurize::FeaturizedSentence> train;
  std::vector<featurize::FeaturizedSentence> validation;
  for (std::size_t i : idx.train) train.push_back(store.trainval[i]);
  for (std::size_t i : idx.validation) validation.push_back(store.trainval[i]);

  TrialOutcome out;
  out.model = factory ? factory(cfg.model, store.context, cfg.seed)
                      : models::make_classifier(cfg.model, store.context, cfg.seed);
  Rng rng = Rng(cfg.seed).derive(kTrainStream);
  out.trace = out.model->fit(train, validation, cfg.stop, rng, cfg.monitor);

  auto& r = out.result;
  r.variant_id = cfg.variant_id;
  r.variant_index = cfg.variant_index;
  r.variant_label = models::describe(cfg.model);
  r.family = models::family(cfg.model);
  r.features = needed.to_string();
  r.seed = cfg.seed;
  r.monitor = std::string(evalstats::to_string(cfg.monitor));
  r.best_epoch = out.trace.best_epoch;
  r.stopped_epoch = out.trace.stopped_epoch;
  r.train = models::evaluate(*out.model, train);
  r.validation = models::evaluate(*out.model, validation);
  r.test = models::evaluate(*out.model, store.test);
  r.best_validation_f1 =
      out.model->iterative() ? out.trace.best_validation_score : evalstats::metrics(r.validation).f1(cfg.monitor);
  if (!cfg.deterministic) {
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  }
  return out;
}

}  // namespace oed::trainer
