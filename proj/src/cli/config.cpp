#include "oed/cli/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "oed/common/hash.hpp"

namespace oed::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key \"" + key + "\" in " + where);
  }
}

template <class T>
T get(const json& j, const std::string& key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for \"" + key + "\" in " + where);
  }
}

template <class T>
void maybe(const json& j, const std::string& key, T& target, const std::string& where) {
  if (j.contains(key)) target = get<T>(j, key, where);
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

featurize::ProviderSpec provider_from(const json& j, const std::string& where) {
  check_keys(j, {"name", "params"}, where);
  featurize::ProviderSpec spec;
  maybe(j, "name", spec.name, where);
  if (j.contains("params")) {
    for (const auto& [key, value] : j.at("params").items()) {
      spec.params[key] = value.is_string() ? value.get<std::string>() : value.dump();
    }
  }
  return spec;
}

models::ModelConfig variant_model(const json& v, const std::string& where) {
  const auto fam = get<std::string>(v, "family", where);
  if (fam == "rnn") {
    check_keys(v, {"id", "family", "arch", "hidden_units", "features", "dropout", "l1", "l2", "learning_rate",
                   "batch_size"},
               where);
    models::RnnConfig r;
    if (v.contains("arch") && v.contains("hidden_units")) throw ConfigError(where + " gives both arch and hidden_units");
    if (v.contains("arch")) {
      r.hidden_units = v.at("arch").is_string() ? models::parse_architecture(get<std::string>(v, "arch", where))
                                                : get<std::vector<int>>(v, "arch", where);
    }
    maybe(v, "hidden_units", r.hidden_units, where);
    maybe(v, "features", r.features, where);
    maybe(v, "dropout", r.dropout, where);
    maybe(v, "l1", r.l1, where);
    maybe(v, "l2", r.l2, where);
    maybe(v, "learning_rate", r.learning_rate, where);
    maybe(v, "batch_size", r.batch_size, where);
    return r;
  }
  if (fam == "cnn") {
    check_keys(v, {"id", "family", "window", "features", "filters_per_size", "filter_sizes", "dropout", "norm_cap",
                   "batch_size", "entity_dim", "position_dim", "learning_rate"},
               where);
    auto c = models::CnnConfig::for_window(v.contains("window") ? get<int>(v, "window", where) : 5);
    if (v.contains("features")) c.set_features(featurize::parse_feature_expr(get<std::string>(v, "features", where)));
    maybe(v, "filters_per_size", c.filters_per_size, where);
    maybe(v, "filter_sizes", c.filter_sizes, where);
    maybe(v, "dropout", c.dropout, where);
    maybe(v, "norm_cap", c.norm_cap, where);
    maybe(v, "batch_size", c.batch_size, where);
    maybe(v, "entity_dim", c.entity_dim, where);
    maybe(v, "position_dim", c.position_dim, where);
    maybe(v, "learning_rate", c.learning_rate, where);
    return c;
  }
  if (fam == "svm") {
    check_keys(v, {"id", "family", "kernel", "c", "degree", "coef0", "tolerance", "cache_mb"}, where);
    models::SvmConfig s;
    if (v.contains("kernel")) s.kernel = models::svm_kernel_from_string(get<std::string>(v, "kernel", where));
    maybe(v, "c", s.c, where);
    maybe(v, "degree", s.degree, where);
    maybe(v, "coef0", s.coef0, where);
    maybe(v, "tolerance", s.tolerance, where);
    maybe(v, "cache_mb", s.cache_mb, where);
    return s;
  }
  throw ConfigError("unknown model family \"" + fam + "\" in " + where + " (rnn, cnn, svm)");
}

}  // namespace

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  auto number = [&](std::string_view s) {
    std::uint64_t v = 0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || end != s.data() + s.size()) {
      throw ConfigError("bad seed list \"" + text + "\" (use 1..10)");
    }
    return v;
  };
  std::vector<std::uint64_t> out;
  if (!text.empty() && text.front() == '[') {
    try {
      for (const auto& v : json::parse(text)) out.push_back(v.get<std::uint64_t>());
    } catch (const json::exception&) {
      throw ConfigError("bad seed list \"" + text + "\"");
    }
    return out;
  }
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const auto lo = number(std::string_view(text).substr(0, dots));
    const auto hi = number(std::string_view(text).substr(dots + 2));
    if (hi < lo) throw ConfigError("empty seed range \"" + text + "\"");
    for (auto s = lo; s <= hi; ++s) out.push_back(s);
    return out;
  }
  out.push_back(number(text));
  return out;
}

trainer::ExperimentConfig parse_config(const std::string& text, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, {"name", "data", "embeddings", "providers", "cache_dir", "output", "seeds", "patience", "max_epochs",
                 "validation_fraction", "fixed_split", "split_seed", "monitor", "deterministic", "save_checkpoints",
                 "jobs", "variants"},
             "config");
  trainer::ExperimentConfig cfg;
  cfg.hash = to_hex(fnv1a64(text));
  maybe(j, "name", cfg.name, "config");

  if (!j.contains("data")) throw ConfigError("config needs a \"data\" section");
  const auto& data = j.at("data");
  check_keys(data, {"manifest", "trainval", "test"}, "data");
  if (data.contains("manifest")) cfg.manifest = resolve(base_dir, get<std::string>(data, "manifest", "data"));
  if (data.contains("trainval")) cfg.trainval = resolve(base_dir, get<std::string>(data, "trainval", "data"));
  if (data.contains("test")) cfg.test = resolve(base_dir, get<std::string>(data, "test", "data"));
  if (cfg.manifest.empty() == (cfg.trainval.empty() || cfg.test.empty())) {
    throw ConfigError("data needs either \"manifest\" or both \"trainval\" and \"test\"");
  }
  if (j.contains("embeddings")) cfg.embeddings = resolve(base_dir, get<std::string>(j, "embeddings", "config"));
  if (j.contains("cache_dir")) cfg.cache_dir = resolve(base_dir, get<std::string>(j, "cache_dir", "config"));
  if (j.contains("output")) cfg.output = resolve(base_dir, get<std::string>(j, "output", "config"));
  if (j.contains("providers")) {
    const auto& p = j.at("providers");
    check_keys(p, {"B", "Sp"}, "providers");
    if (p.contains("B")) cfg.contextual = provider_from(p.at("B"), "providers.B");
    if (p.contains("Sp")) cfg.subword = provider_from(p.at("Sp"), "providers.Sp");
  }
  if (j.contains("seeds")) {
    const auto& s = j.at("seeds");
    if (s.is_string()) {
      cfg.seeds = parse_seeds(s.get<std::string>());
    } else if (s.is_array()) {
      cfg.seeds = get<std::vector<std::uint64_t>>(j, "seeds", "config");
    } else {
      throw ConfigError("seeds must be a range string like \"1..5\" or a list");
    }
  }
  maybe(j, "patience", cfg.stop.patience, "config");
  maybe(j, "max_epochs", cfg.stop.max_epochs, "config");
  maybe(j, "validation_fraction", cfg.validation_fraction, "config");
  maybe(j, "fixed_split", cfg.fixed_split, "config");
  maybe(j, "split_seed", cfg.split_seed, "config");
  if (j.contains("monitor")) cfg.monitor = evalstats::f1_kind_from_string(get<std::string>(j, "monitor", "config"));
  maybe(j, "deterministic", cfg.deterministic, "config");
  maybe(j, "save_checkpoints", cfg.save_checkpoints, "config");
  maybe(j, "jobs", cfg.jobs, "config");

  if (!j.contains("variants") || !j.at("variants").is_array()) throw ConfigError("config needs a \"variants\" list");
  std::size_t index = 0;
  for (const auto& v : j.at("variants")) {
    ++index;
    const std::string where = "variant " + std::to_string(index);
    if (!v.is_object()) throw ConfigError(where + " must be an object");
    trainer::Variant variant;
    variant.id = v.contains("id") ? get<std::string>(v, "id", where) : "v" + std::to_string(index);
    variant.model = variant_model(v, where);
    cfg.variants.push_back(std::move(variant));
  }
  cfg.validate();
  return cfg;
}

trainer::ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  auto cfg = parse_config(buf.str(), path.parent_path());
  cfg.source = path;
  return cfg;
}

fs::path default_output(const trainer::ExperimentConfig& cfg) {
  return cfg.output.empty() ? fs::path("out") / cfg.name : cfg.output;
}

}  // namespace oed::cli
