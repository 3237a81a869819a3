#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "oed/trainer/experiment.hpp"

namespace oed::cli {

class ConfigError : public UsageError {
 public:
  using UsageError::UsageError;
};

/// Experiment config as JSON. Unknown keys anywhere are rejected. Relative
/// paths resolve against `base_dir`; `hash` is the FNV-1a of `text`.
trainer::ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);
trainer::ExperimentConfig load_config(const std::filesystem::path& path);

/// "1..5", "3", or a JSON-style list "[1,2,3]".
std::vector<std::uint64_t> parse_seeds(const std::string& text);

/// Output directory named by the config ("output" key), or out/<name>.
std::filesystem::path default_output(const trainer::ExperimentConfig& cfg);

}  // namespace oed::cli
