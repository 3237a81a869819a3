#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "oed/featurize/encoder.hpp"
#include "oed/trainer/trial.hpp"

namespace oed::trainer {

struct Variant {
  std::string id;
  models::ModelConfig model;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::vector<Variant> variants;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

  /// Either a partition manifest or explicit trainval/test files.
  std::filesystem::path manifest;
  std::filesystem::path trainval;
  std::filesystem::path test;
  /// Optional pretrained 300-d word vectors in text format.
  std::filesystem::path embeddings;
  featurize::ProviderSpec contextual;  // B, and S derived from it
  featurize::ProviderSpec subword;     // Sp
  /// Where results go unless the caller says otherwise.
  std::filesystem::path output;
  /// Frozen-feature cache; empty disables caching.
  std::filesystem::path cache_dir;

  double validation_fraction = 0.2;
  bool fixed_split = false;
  std::uint64_t split_seed = 1;
  models::StopPolicy stop;
  evalstats::F1Kind monitor = evalstats::F1Kind::kStandard;
  bool deterministic = true;
  bool save_checkpoints = false;
  int jobs = 1;

  /// FNV-1a of the config file bytes (or of the canonical form when built in code).
  std::string hash;
  std::filesystem::path source;

  featurize::FeatureSet required_features() const;
  TrialConfig trial(std::size_t variant_index, std::uint64_t seed) const;
  /// Throws UsageError on an empty grid, duplicate or unsafe variant ids,
  /// or seeds that are not a consecutive run of positive integers.
  void validate() const;
};

/// Loads the corpus and featurizes it with every kind the variants need,
/// plus `extra`.
FeatureStore prepare_features(const ExperimentConfig& cfg, featurize::FeatureSet extra = {});

struct RunOptions {
  /// Precomputed features; prepared from the config when absent.
  const FeatureStore* store = nullptr;
  ClassifierFactory factory;
  /// Stop after executing this many trials (simulates an interruption).
  std::optional<std::size_t> max_trials;
  std::function<void(const TrialResult&)> on_result;
};

struct ExperimentSummary {
  std::vector<TrialResult> results;  // every record present after the call
  std::size_t executed = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
};

std::string trial_file_name(const std::string& variant_id, std::uint64_t seed);

/// Runs every (variant, seed) pair, writing trial-<variant>-<seed>.json as
/// each finishes. A failing trial is recorded with status "failed" and the
/// others continue. Throws Error if `out_dir` cannot be written or already
/// belongs to an experiment with a different config hash.
ExperimentSummary run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                                 const RunOptions& options = {});

/// Executes only the trials without a successful record in `out_dir`.
/// Throws UsageError when the stored config hash differs from cfg.hash.
ExperimentSummary resume_experiment(const std::filesystem::path& out_dir, const ExperimentConfig& cfg,
                                    const RunOptions& options = {});

/// Every trial record in a directory, ordered by (variant index, seed).
std::vector<TrialResult> load_results(const std::filesystem::path& dir);

}  // namespace oed::trainer
