#include "oed/trainer/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "oed/common/hash.hpp"
#include "oed/featurize/cache.hpp"
#include "oed/models/factory.hpp"

namespace oed::trainer {

namespace fs = std::filesystem;
using featurize::FeatureKind;
using nlohmann::ordered_json;

namespace {

constexpr const char* kMetaFile = "experiment.json";

bool safe_id(const std::string& id) {
  if (id.empty()) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' || c == '_';
  });
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_atomic(const fs::path& path, const std::string& data) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << data;
    if (!out) throw Error("cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error("cannot move " + tmp.string() + " into place: " + ec.message());
}

std::string effective_hash(const ExperimentConfig& cfg) {
  if (!cfg.hash.empty()) return cfg.hash;
  std::string canonical = cfg.name;
  for (const auto& v : cfg.variants) canonical += "|" + v.id + "=" + models::to_json(v.model);
  for (auto s : cfg.seeds) canonical += "|" + std::to_string(s);
  return to_hex(fnv1a64(canonical));
}

struct Meta {
  std::string name;
  std::string hash;
};

std::optional<Meta> read_meta(const fs::path& dir) {
  if (!fs::exists(dir / kMetaFile)) return std::nullopt;
  try {
    const auto j = ordered_json::parse(read_file(dir / kMetaFile));
    return Meta{j.at("name").get<std::string>(), j.at("config_hash").get<std::string>()};
  } catch (const ordered_json::exception& e) {
    throw Error("malformed " + (dir / kMetaFile).string() + ": " + e.what());
  }
}

void write_meta(const fs::path& dir, const ExperimentConfig& cfg) {
  ordered_json j;
  j["name"] = cfg.name;
  j["config_hash"] = effective_hash(cfg);
  j["config_path"] = cfg.source.string();
  j["variants"] = ordered_json::array();
  for (const auto& v : cfg.variants) {
    j["variants"].push_back({{"id", v.id}, {"label", models::describe(v.model)}});
  }
  j["seeds"] = cfg.seeds;
  write_atomic(dir / kMetaFile, j.dump(2) + "\n");
}

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error("cannot create output directory " + dir.string());
  const fs::path probe = dir / ".write-probe";
  {
    std::ofstream out(probe);
    if (!out) throw Error("output directory " + dir.string() + " is not writable");
  }
  fs::remove(probe, ec);
}

struct Job {
  std::size_t variant;
  std::uint64_t seed;
};

ExperimentSummary execute(const ExperimentConfig& cfg, const fs::path& dir, const RunOptions& options,
                          const std::vector<Job>& jobs, std::size_t skipped) {
  std::optional<FeatureStore> owned;
  const FeatureStore* store = options.store;
  if (!store && !jobs.empty()) {
    owned = prepare_features(cfg);
    store = &*owned;
  }
  const std::size_t limit = std::min(jobs.size(), options.max_trials.value_or(jobs.size()));

  ExperimentSummary summary;
  summary.skipped = skipped;
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < limit; k = next++) {
      const Job job = jobs[k];
      const TrialConfig tc = cfg.trial(job.variant, job.seed);
      TrialResult result;
      try {
        auto outcome = run_trial(tc, *store, options.factory);
        result = outcome.result;
        if (cfg.save_checkpoints) {
          models::save_checkpoint(dir / "checkpoints" / (tc.variant_id + "-" + std::to_string(tc.seed)), tc.model,
                                  *outcome.model, store->context);
        }
      } catch (const std::exception& e) {
        result = TrialResult{};
        result.variant_id = tc.variant_id;
        result.variant_index = tc.variant_index;
        result.variant_label = models::describe(tc.model);
        result.family = models::family(tc.model);
        result.features = models::feature_set(tc.model).to_string();
        result.seed = tc.seed;
        result.monitor = std::string(evalstats::to_string(tc.monitor));
        result.status = TrialStatus::kFailed;
        result.error = e.what();
      }
      write_atomic(dir / trial_file_name(tc.variant_id, tc.seed), to_json(result));
      std::lock_guard lock(mu);
      ++summary.executed;
      if (!result.ok()) ++summary.failed;
      if (options.on_result) options.on_result(result);
    }
  };
  const int threads = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(limit)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  summary.results = load_results(dir);
  return summary;
}

}  // namespace

featurize::FeatureSet ExperimentConfig::required_features() const {
  featurize::FeatureSet kinds;
  for (const auto& v : variants) kinds = kinds | models::feature_set(v.model);
  return kinds;
}

TrialConfig ExperimentConfig::trial(std::size_t variant_index, std::uint64_t seed) const {
  TrialConfig tc;
  tc.variant_id = variants.at(variant_index).id;
  tc.variant_index = variant_index;
  tc.model = variants[variant_index].model;
  tc.seed = seed;
  tc.validation_fraction = validation_fraction;
  tc.fixed_split = fixed_split;
  tc.split_seed = split_seed;
  tc.stop = stop;
  tc.monitor = monitor;
  tc.deterministic = deterministic;
  return tc;
}

void ExperimentConfig::validate() const {
  if (variants.empty()) throw UsageError("experiment \"" + name + "\" has no variants");
  std::set<std::string> ids;
  for (const auto& v : variants) {
    if (!safe_id(v.id)) throw UsageError("variant id \"" + v.id + "\" must use only letters, digits, '.' and '_'");
    if (!ids.insert(v.id).second) throw UsageError("duplicate variant id \"" + v.id + "\"");
    models::validate(v.model);
  }
  if (seeds.empty()) throw UsageError("experiment needs at least one seed");
  if (seeds.front() < 1) throw UsageError("seeds must be positive");
  for (std::size_t i = 1; i < seeds.size(); ++i) {
    if (seeds[i] != seeds[i - 1] + 1) throw UsageError("seeds must be consecutive");
  }
  if (!(validation_fraction > 0 && validation_fraction < 1)) throw UsageError("validation_fraction must lie in (0, 1)");
  if (stop.patience < 1) throw UsageError("patience must be at least 1");
  if (stop.max_epochs < 1) throw UsageError("max_epochs must be at least 1");
  if (jobs < 1) throw UsageError("jobs must be at least 1");
}

FeatureStore prepare_features(const ExperimentConfig& cfg, featurize::FeatureSet extra) {
  corpus::Corpus data;
  if (!cfg.manifest.empty()) {
    data = corpus::load_corpus(corpus::load_manifest(cfg.manifest));
  } else {
    if (cfg.trainval.empty() || cfg.test.empty()) throw UsageError("config names neither a manifest nor both data files");
    corpus::Manifest m{cfg.trainval, cfg.test};
    data = corpus::load_corpus(m);
  }
  std::optional<featurize::StaticEmbeddings> pretrained;
  if (!cfg.embeddings.empty()) pretrained = featurize::StaticEmbeddings::load_text(cfg.embeddings);
  const corpus::Dataset* parts[] = {&data.trainval, &data.test};
  auto context = featurize::build_context(parts, pretrained ? &*pretrained : nullptr);

  const auto kinds = cfg.required_features() | extra | featurize::FeatureSet{FeatureKind::W};
  featurize::ProviderRegistry providers;
  if (kinds.contains(FeatureKind::B) || kinds.contains(FeatureKind::S)) {
    providers[FeatureKind::B] = featurize::make_encoder(cfg.contextual, featurize::dim(FeatureKind::B));
  }
  if (kinds.contains(FeatureKind::Sp)) {
    providers[FeatureKind::Sp] = featurize::make_encoder(cfg.subword, featurize::dim(FeatureKind::Sp));
  }
  std::shared_ptr<featurize::FeatureCache> cache;
  if (!cfg.cache_dir.empty()) cache = std::make_shared<featurize::FeatureCache>(cfg.cache_dir);
  featurize::Featurizer featurizer(std::move(context), std::move(providers), cache);
  return build_feature_store(data, featurizer, kinds);
}

std::string trial_file_name(const std::string& variant_id, std::uint64_t seed) {
  return "trial-" + variant_id + "-" + std::to_string(seed) + ".json";
}

ExperimentSummary run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir, const RunOptions& options) {
  cfg.validate();
  prepare_dir(out_dir);
  if (auto meta = read_meta(out_dir); meta && meta->hash != effective_hash(cfg)) {
    throw Error("output directory " + out_dir.string() + " belongs to a different experiment (config hash " +
                meta->hash + ")");
  }
  write_meta(out_dir, cfg);
  std::vector<Job> jobs;
  for (std::size_t v = 0; v < cfg.variants.size(); ++v) {
    for (auto seed : cfg.seeds) jobs.push_back({v, seed});
  }
  return execute(cfg, out_dir, options, jobs, 0);
}

ExperimentSummary resume_experiment(const fs::path& out_dir, const ExperimentConfig& cfg, const RunOptions& options) {
  cfg.validate();
  const auto meta = read_meta(out_dir);
  if (!meta) throw UsageError(out_dir.string() + " holds no experiment to resume");
  if (meta->hash != effective_hash(cfg)) {
    throw UsageError("config hash mismatch: " + out_dir.string() + " was run with " + meta->hash + ", config is " +
                     effective_hash(cfg));
  }
  prepare_dir(out_dir);
  std::set<std::pair<std::string, std::uint64_t>> done;
  for (const auto& r : load_results(out_dir)) {
    if (r.ok()) done.insert({r.variant_id, r.seed});
  }
  std::vector<Job> jobs;
  std::size_t skipped = 0;
  for (std::size_t v = 0; v < cfg.variants.size(); ++v) {
    for (auto seed : cfg.seeds) {
      if (done.count({cfg.variants[v].id, seed})) {
        ++skipped;
      } else {
        jobs.push_back({v, seed});
      }
    }
  }
  return execute(cfg, out_dir, options, jobs, skipped);
}

std::vector<TrialResult> load_results(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw UsageError("results directory " + dir.string() + " does not exist");
  std::vector<TrialResult> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (!entry.is_regular_file() || name.rfind("trial-", 0) != 0 || entry.path().extension() != ".json") continue;
    out.push_back(trial_result_from_json(read_file(entry.path())));
  }
  std::sort(out.begin(), out.end(), [](const TrialResult& a, const TrialResult& b) {
    return std::tie(a.variant_index, a.variant_id, a.seed) < std::tie(b.variant_index, b.variant_id, b.seed);
  });
  return out;
}

}  // namespace oed::trainer
