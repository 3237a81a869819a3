#include "oed/cli/dispatch.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "oed/annotator/service.hpp"
#include "oed/cli/config.hpp"
#include "oed/common/hash.hpp"
#include "oed/corpus/stats.hpp"
#include "oed/evalstats/report.hpp"
#include "oed/featurize/cache.hpp"
#include "oed/models/factory.hpp"
#include "oed/trainer/experiment.hpp"

namespace oed::cli {

namespace fs = std::filesystem;
using featurize::FeatureKind;

namespace {

void require_file(const fs::path& path, const std::string& what) {
  if (!fs::is_regular_file(path)) throw UsageError(what + " not found: " + path.string());
}

void require_data(const trainer::ExperimentConfig& cfg) {
  if (!cfg.manifest.empty()) {
    require_file(cfg.manifest, "manifest");
    const auto m = corpus::load_manifest(cfg.manifest);
    require_file(m.trainval, "dataset");
    require_file(m.test, "dataset");
  } else {
    require_file(cfg.trainval, "dataset");
    require_file(cfg.test, "dataset");
  }
  if (!cfg.embeddings.empty()) require_file(cfg.embeddings, "embedding file");
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error("cannot write " + path.string());
}

/// Flags shared by train, experiment and svm.
struct Overrides {
  std::string features;
  std::string arch;
  int window = 0;
  int patience = 0;
  int max_epochs = 0;
  std::uint64_t seed = 0;
  std::string seeds;
  int jobs = 0;

  void add_to(CLI::App& app, bool with_seeds) {
    app.add_option("--features", features, "Feature expression, e.g. \"all-{B}\"");
    app.add_option("--arch", arch, "RNN layer sizes, e.g. \"<100,15,5>\"");
    app.add_option("--window", window, "CNN window size (odd)");
    app.add_option("--patience", patience, "Early-stopping patience in epochs");
    app.add_option("--max-epochs", max_epochs, "Epoch cap");
    app.add_option("--seed", seed, "Run only this seed");
    if (with_seeds) app.add_option("--seeds", seeds, "Seed range, e.g. 1..5");
    app.add_option("--jobs", jobs, "Trials run in parallel");
  }

  std::string describe() const {
    std::ostringstream s;
    s << features << '|' << arch << '|' << window << '|' << patience << '|' << max_epochs << '|' << seed << '|'
      << seeds;
    return s.str();
  }

  bool any() const {
    return !features.empty() || !arch.empty() || window || patience || max_epochs || seed || !seeds.empty();
  }

  void apply(trainer::ExperimentConfig& cfg) const {
    for (auto& v : cfg.variants) {
      if (auto* r = std::get_if<models::RnnConfig>(&v.model)) {
        if (!features.empty()) r->features = features;
        if (!arch.empty()) r->hidden_units = models::parse_architecture(arch);
      } else if (auto* c = std::get_if<models::CnnConfig>(&v.model)) {
        if (window) {
          auto fresh = models::CnnConfig::for_window(window, c->use_entity);
          fresh.filters_per_size = c->filters_per_size;
          fresh.dropout = c->dropout;
          fresh.norm_cap = c->norm_cap;
          fresh.batch_size = c->batch_size;
          fresh.learning_rate = c->learning_rate;
          *c = fresh;
        }
        if (!features.empty()) c->set_features(featurize::parse_feature_expr(features));
      }
    }
    if (patience) cfg.stop.patience = patience;
    if (max_epochs) cfg.stop.max_epochs = max_epochs;
    if (!seeds.empty()) cfg.seeds = parse_seeds(seeds);
    if (seed) cfg.seeds = {seed};
    if (jobs) cfg.jobs = jobs;
    if (any()) cfg.hash = to_hex(fnv1a64(cfg.hash + "|" + describe()));
  }
};

void apply_cache_env(trainer::ExperimentConfig& cfg) {
  if (const char* dir = std::getenv("OED_CACHE_DIR"); dir && *dir) cfg.cache_dir = dir;
}

/// Data flags for verbs that may run without a config file.
struct DataFlags {
  std::string config;
  std::string manifest;
  std::string trainval;
  std::string test;
  std::string embeddings;

  void add_to(CLI::App& app) {
    app.add_option("--config", config, "Experiment config (JSON)");
    app.add_option("--manifest", manifest, "Partition manifest");
    app.add_option("--data,--trainval", trainval, "Train/validation JSONL");
    app.add_option("--test", test, "Test JSONL");
    app.add_option("--embeddings", embeddings, "Pretrained 300-d word vectors (text format)");
  }

  trainer::ExperimentConfig base() const {
    trainer::ExperimentConfig cfg;
    if (!config.empty()) {
      require_file(config, "config");
      cfg = load_config(config);
    } else {
      cfg.hash = "cli";
    }
    if (!manifest.empty()) {
      cfg.manifest = manifest;
      cfg.trainval.clear();
      cfg.test.clear();
    }
    if (!trainval.empty()) {
      cfg.trainval = trainval;
      cfg.manifest.clear();
    }
    if (!test.empty()) cfg.test = test;
    if (!embeddings.empty()) cfg.embeddings = embeddings;
    if (cfg.manifest.empty() && (cfg.trainval.empty() || cfg.test.empty())) {
      throw UsageError("give --config, --manifest, or both --data and --test");
    }
    apply_cache_env(cfg);
    return cfg;
  }
};

std::vector<evalstats::ScoredTrial> scored(const std::vector<trainer::TrialResult>& results, const std::string& split,
                                           std::size_t& failed) {
  std::vector<evalstats::ScoredTrial> out;
  failed = 0;
  for (const auto& r : results) {
    if (!r.ok()) {
      ++failed;
      continue;
    }
    const auto& counts = split == "test" ? r.test : split == "validation" ? r.validation : r.train;
    out.push_back({r.variant_id, r.variant_label, r.variant_index, r.seed, counts});
  }
  return out;
}

struct ReportFlags {
  std::string split = "test";
  std::string f1 = "std";
  bool student = false;
  bool against_best = true;
  double level = 0.95;
  std::string csv;
  std::string format = "text";

  void add_to(CLI::App& app) {
    app.add_option("--split", split, "Split compared: test, validation or train")
        ->check(CLI::IsMember({"test", "validation", "train"}));
    app.add_option("--f1", f1, "F1 flavour: std or sens-spec")->check(CLI::IsMember({"std", "sens-spec"}));
    app.add_flag("--student", student, "Pooled-variance t-test instead of Welch");
    app.add_flag("--against-best", against_best, "Test every variant against the best one (default)");
    app.add_option("--level", level, "Confidence level");
    app.add_option("--csv", csv, "CSV output path (default <dir>/report-<split>.csv)");
    app.add_option("--format", format, "Console output: text or csv")->check(CLI::IsMember({"text", "csv"}));
  }
};

int emit_report(const fs::path& dir, const std::vector<trainer::TrialResult>& results, const ReportFlags& flags,
                std::ostream& out, std::ostream& err) {
  std::size_t failed = 0;
  const auto trials = scored(results, flags.split, failed);
  if (trials.empty()) throw Error("no successful trials in " + dir.string());
  evalstats::ReportOptions opts;
  opts.split = flags.split;
  opts.f1 = evalstats::f1_kind_from_string(flags.f1);
  opts.test = flags.student ? evalstats::TTestKind::kStudent : evalstats::TTestKind::kWelch;
  opts.level = flags.level;
  auto report = evalstats::render_report(trials, opts);
  if (failed) report.notes.push_back(std::to_string(failed) + " failed trial(s) left out");
  const fs::path csv_path = flags.csv.empty() ? dir / ("report-" + flags.split + ".csv") : fs::path(flags.csv);
  write_text(csv_path, evalstats::to_csv(report));
  out << (flags.format == "csv" ? evalstats::to_csv(report) : evalstats::to_text(report));
  err << "wrote " << csv_path.string() << '\n';
  return kExitOk;
}

int run_stats(const std::string& path, bool as_json, std::ostream& out) {
  require_file(path, "dataset");
  const auto stats = corpus::compute_stats(corpus::load_dataset(path));
  if (!as_json) {
    out << corpus::format_stats(stats);
    return kExitOk;
  }
  nlohmann::ordered_json j{{"sentences", stats.sentence_count},
                           {"tokens", stats.token_count},
                           {"words", stats.word_count},
                           {"events", stats.event_count},
                           {"entities", stats.entity_count},
                           {"avg_tokens", stats.avg_tokens},
                           {"avg_words", stats.avg_words},
                           {"avg_entities", stats.avg_entities},
                           {"avg_events", stats.avg_events},
                           {"vocab", {{"W", stats.word_vocab_size},
                                      {"P", stats.pos_vocab_size},
                                      {"T", stats.tag_vocab_size},
                                      {"D", stats.dep_vocab_size},
                                      {"E", stats.entity_vocab_size}}}};
  out << j.dump(2) << '\n';
  return kExitOk;
}

int run_featurize(const DataFlags& data, const std::string& features, const std::string& cache_flag,
                  std::ostream& out) {
  auto cfg = data.base();
  if (!cache_flag.empty()) cfg.cache_dir = cache_flag;
  if (cfg.cache_dir.empty()) cfg.cache_dir = "cache";
  require_data(cfg);
  const auto kinds = featurize::parse_feature_expr(features);
  cfg.variants.clear();
  fs::create_directories(cfg.cache_dir);
  const auto store = trainer::prepare_features(cfg, kinds);
  std::size_t tokens = 0;
  for (const auto& s : store.trainval) tokens += s.size();
  for (const auto& s : store.test) tokens += s.size();
  out << "features   " << kinds.to_string() << " (" << featurize::concat_dim(kinds) << " dims per token)\n"
      << "sentences  " << store.trainval.size() << " trainval, " << store.test.size() << " test\n"
      << "tokens     " << tokens << "\n"
      << "cache      " << cfg.cache_dir.string() << "\n";
  return kExitOk;
}

struct TrainFlags {
  std::string variant;
  std::string family = "rnn";
  std::string kernel = "rbf";
  std::string out = "out/train";
  bool checkpoint = false;
};

int run_train(const DataFlags& data, const Overrides& over, const TrainFlags& flags, std::ostream& out) {
  auto cfg = data.base();
  if (data.config.empty()) {
    models::ModelConfig model;
    if (flags.family == "rnn") {
      model = models::RnnConfig{};
    } else if (flags.family == "cnn") {
      model = models::CnnConfig::for_window(over.window ? over.window : 5);
    } else if (flags.family == "svm") {
      models::SvmConfig s;
      s.kernel = models::svm_kernel_from_string(flags.kernel);
      model = s;
    } else {
      throw UsageError("unknown family \"" + flags.family + "\" (rnn, cnn, svm)");
    }
    cfg.variants = {{flags.variant.empty() ? "train" : flags.variant, model}};
    cfg.seeds = {1};
  } else if (!flags.variant.empty()) {
    std::erase_if(cfg.variants, [&](const trainer::Variant& v) { return v.id != flags.variant; });
    if (cfg.variants.empty()) throw UsageError("config has no variant \"" + flags.variant + "\"");
  }
  cfg.variants.resize(1);
  over.apply(cfg);
  if (!over.seed) cfg.seeds = {cfg.seeds.front()};
  cfg.validate();
  require_data(cfg);

  const auto store = trainer::prepare_features(cfg);
  const auto tc = cfg.trial(0, cfg.seeds.front());
  auto outcome = trainer::run_trial(tc, store);
  const fs::path dir = flags.out;
  fs::create_directories(dir);
  const fs::path file = dir / trainer::trial_file_name(tc.variant_id, tc.seed);
  write_text(file, trainer::to_json(outcome.result));
  if (flags.checkpoint) {
    models::save_checkpoint(dir / "checkpoints" / (tc.variant_id + "-" + std::to_string(tc.seed)), tc.model,
                            *outcome.model, store.context);
  }
  const auto m = evalstats::metrics(outcome.result.test);
  out << outcome.result.variant_label << " seed " << tc.seed << ": best epoch " << outcome.result.best_epoch
      << ", test sens " << m.sensitivity << " spec " << m.specificity << " F1 " << m.f1_std << "\n"
      << "wrote " << file.string() << "\n";
  return kExitOk;
}

int run_experiment_verb(const std::string& action, const std::string& config, const std::string& out_flag,
                        const Overrides& over, const ReportFlags& report, bool with_report, std::ostream& out,
                        std::ostream& err) {
  require_file(config, "config");
  auto cfg = load_config(config);
  apply_cache_env(cfg);
  over.apply(cfg);
  cfg.validate();
  require_data(cfg);
  const fs::path dir = out_flag.empty() ? default_output(cfg) : fs::path(out_flag);
  trainer::RunOptions opts;
  opts.on_result = [&err](const trainer::TrialResult& r) {
    err << "trial " << r.variant_id << " seed " << r.seed << ": " << (r.ok() ? "ok" : "FAILED " + r.error) << '\n';
  };
  const auto summary =
      action == "run" ? trainer::run_experiment(cfg, dir, opts) : trainer::resume_experiment(dir, cfg, opts);
  out << "executed " << summary.executed << ", skipped " << summary.skipped << ", failed " << summary.failed
      << ", results " << summary.results.size() << " in " << dir.string() << "\n";
  if (with_report && !summary.results.empty()) emit_report(dir, summary.results, report, out, err);
  return summary.failed ? kExitRuntime : kExitOk;
}

int run_svm(const DataFlags& data, std::vector<std::string> kernels, const std::string& out_flag,
            const ReportFlags& report, std::ostream& out, std::ostream& err) {
  auto cfg = data.base();
  if (kernels.empty()) kernels = {"linear", "polynomial", "rbf", "sigmoid"};
  cfg.name = "svm";
  cfg.variants.clear();
  for (const auto& k : kernels) {
    models::SvmConfig s;
    s.kernel = models::svm_kernel_from_string(k);
    cfg.variants.push_back({"svm_" + models::to_string(s.kernel), s});
  }
  cfg.seeds = {1};
  cfg.hash = to_hex(fnv1a64(cfg.hash + "|svm|" + [&] {
    std::string all;
    for (const auto& k : kernels) all += k + ",";
    return all;
  }()));
  cfg.validate();
  require_data(cfg);
  const fs::path dir = out_flag.empty() ? fs::path("out/svm") : fs::path(out_flag);
  const auto summary = trainer::run_experiment(cfg, dir);
  emit_report(dir, summary.results, report, out, err);
  return summary.failed ? kExitRuntime : kExitOk;
}

int run_serve(const std::string& host, int port, std::ostream& out) {
  annotator::AnnotationService service;
  annotator::HttpServer server(service);
  const int bound = server.bind(host, port);
  if (bound < 0) throw Error("cannot listen on " + host + ":" + std::to_string(port));
  out << "annotation service on http://" << host << ":" << bound << std::endl;
  server.run();
  return kExitOk;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ongoing event detection: corpus tools, feature extraction, training and annotation", "oed"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  std::string stats_path;
  bool stats_json = false;
  auto* stats = app.add_subcommand("stats", "Corpus statistics of a JSONL dataset");
  stats->add_option("dataset", stats_path, "Dataset file")->required();
  stats->add_flag("--json", stats_json, "Print JSON");

  DataFlags feat_data;
  std::string feat_features = "all";
  std::string feat_cache;
  auto* feat = app.add_subcommand("featurize", "Compute and cache frozen contextual features");
  feat_data.add_to(*feat);
  feat->add_option("--features", feat_features, "Feature expression");
  feat->add_option("--cache", feat_cache, "Cache directory (default $OED_CACHE_DIR or ./cache)");

  DataFlags train_data;
  Overrides train_over;
  TrainFlags train_flags;
  auto* train = app.add_subcommand("train", "Run a single trial");
  train_data.add_to(*train);
  train_over.add_to(*train, false);
  train->add_option("--variant", train_flags.variant, "Variant id (from --config, or a name for the record)");
  train->add_option("--family", train_flags.family, "rnn, cnn or svm")->check(CLI::IsMember({"rnn", "cnn", "svm"}));
  train->add_option("--kernel", train_flags.kernel, "SVM kernel");
  train->add_option("--out", train_flags.out, "Output directory");
  train->add_flag("--checkpoint", train_flags.checkpoint, "Save the trained model");

  auto* exp = app.add_subcommand("experiment", "Run or resume a declared grid of trials");
  exp->require_subcommand(1);
  std::string exp_config;
  std::string exp_out;
  Overrides exp_over;
  ReportFlags exp_report;
  bool exp_with_report = false;
  for (const char* action : {"run", "resume"}) {
    auto* sub = exp->add_subcommand(action, std::string(action) + " an experiment");
    sub->add_option("config", exp_config, "Experiment config (JSON)")->required();
    sub->add_option("--out", exp_out, "Output directory (default from the config)");
    exp_over.add_to(*sub, true);
    sub->add_flag("--report", exp_with_report, "Print the comparison report afterwards");
  }

  std::string report_dir;
  ReportFlags report_flags;
  auto* report = app.add_subcommand("report", "Compare variants of a results directory");
  report->add_option("results", report_dir, "Results directory")->required();
  report_flags.add_to(*report);

  DataFlags svm_data;
  std::vector<std::string> svm_kernels;
  std::string svm_out;
  ReportFlags svm_report;
  auto* svm = app.add_subcommand("svm", "Fit the SVM baseline with each kernel and compare");
  svm_data.add_to(*svm);
  svm->add_option("--kernel", svm_kernels, "Kernel(s); all four by default");
  svm->add_option("--out", svm_out, "Output directory");
  svm->add_option("--split", svm_report.split, "Split compared")->check(CLI::IsMember({"test", "validation", "train"}));

  std::string host = "127.0.0.1";
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "Start the annotation HTTP service");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port (0 picks a free one)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*stats) return run_stats(stats_path, stats_json, out);
    if (*feat) return run_featurize(feat_data, feat_features, feat_cache, out);
    if (*train) return run_train(train_data, train_over, train_flags, out);
    if (*exp) {
      const std::string action = exp->got_subcommand("run") ? "run" : "resume";
      return run_experiment_verb(action, exp_config, exp_out, exp_over, exp_report, exp_with_report, out, err);
    }
    if (*report) {
      if (!fs::is_directory(report_dir)) throw UsageError("results directory not found: " + report_dir);
      return emit_report(report_dir, trainer::load_results(report_dir), report_flags, out, err);
    }
    if (*svm) return run_svm(svm_data, svm_kernels, svm_out, svm_report, out, err);
    if (*serve) return run_serve(host, port, out);
  } catch (const UsageError& e) {
    err << "oed: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "oed: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace oed::cli
