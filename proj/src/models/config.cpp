#include "oed/models/config.hpp"

#include <charconv>

#include <json.hpp>

namespace oed::models {

using featurize::FeatureKind;
using nlohmann::json;

FeatureSet RnnConfig::feature_set() const { return featurize::parse_feature_expr(features); }

void RnnConfig::validate() const {
  if (hidden_units.empty()) throw UsageError("RNN architecture needs at least one layer");
  for (int h : hidden_units) {
    if (h <= 0) throw UsageError("RNN hidden units must be positive");
  }
  if (feature_set().contains(FeatureKind::Po)) throw UsageError("the RNN does not use the position feature Po");
  if (dropout < 0 || dropout >= 1) throw UsageError("dropout must lie in [0, 1)");
  if (batch_size < 1) throw UsageError("batch size must be positive");
}

CnnConfig CnnConfig::for_window(int window, bool use_entity) {
  CnnConfig c;
  c.window = window;
  c.use_entity = use_entity;
  c.use_position = window > 1;
  std::vector<int> sizes;
  for (int s : c.filter_sizes) {
    if (s <= window) sizes.push_back(s);
  }
  if (sizes.empty()) sizes.push_back(1);
  c.filter_sizes = sizes;
  return c;
}

int CnnConfig::token_width() const {
  return word_dim + (use_entity ? entity_dim : 0) + (use_position ? position_dim : 0);
}

int CnnConfig::total_filters() const { return filters_per_size * static_cast<int>(filter_sizes.size()); }

FeatureSet CnnConfig::feature_set() const {
  FeatureSet s{FeatureKind::W};
  if (use_entity) s.insert(FeatureKind::E);
  if (use_position) s.insert(FeatureKind::Po);
  return s;
}

void CnnConfig::set_features(FeatureSet features) {
  if (!features.contains(FeatureKind::W)) throw UsageError("the CNN always uses word embeddings W");
  const FeatureSet allowed{FeatureKind::W, FeatureKind::E, FeatureKind::Po};
  if (!(features - allowed).empty()) {
    throw UsageError("the CNN accepts only W, E and Po, got " + features.to_string());
  }
  use_entity = features.contains(FeatureKind::E);
  use_position = features.contains(FeatureKind::Po);
}

void CnnConfig::validate() const {
  if (window < 1 || window % 2 == 0) throw UsageError("CNN window must be odd and at least 1");
  if (window == 1 && use_position) throw UsageError("window 1 has no relative positions; drop Po");
  if (filter_sizes.empty() || filters_per_size < 1) throw UsageError("CNN needs at least one filter");
  for (int s : filter_sizes) {
    if (s < 1) throw UsageError("filter sizes must be positive");
    if (s > window) throw UsageError("filter wider than window (" + std::to_string(s) + " > " + std::to_string(window) + ")");
  }
  if (dropout < 0 || dropout >= 1) throw UsageError("dropout must lie in [0, 1)");
  if (batch_size < 1) throw UsageError("batch size must be positive");
  if (norm_cap <= 0) throw UsageError("norm cap must be positive");
  if (word_dim != 300) throw UsageError("word embeddings are 300-dimensional");
}

std::string to_string(SvmKernel k) {
  switch (k) {
    case SvmKernel::kLinear: return "linear";
    case SvmKernel::kPolynomial: return "polynomial";
    case SvmKernel::kRbf: return "rbf";
    case SvmKernel::kSigmoid: return "sigmoid";
  }
  return "?";
}

SvmKernel svm_kernel_from_string(const std::string& name) {
  if (name == "linear") return SvmKernel::kLinear;
  if (name == "polynomial" || name == "poly") return SvmKernel::kPolynomial;
  if (name == "rbf" || name == "RBF") return SvmKernel::kRbf;
  if (name == "sigmoid") return SvmKernel::kSigmoid;
  throw UsageError("unknown SVM kernel \"" + name + "\" (linear, polynomial, rbf, sigmoid)");
}

std::vector<int> parse_architecture(const std::string& text) {
  std::string body = text;
  for (const char* bracket : {"\u27e8", "\u27e9", "<", ">", " "}) {
    for (auto pos = body.find(bracket); pos != std::string::npos; pos = body.find(bracket)) {
      body.erase(pos, std::string_view(bracket).size());
    }
  }
  std::vector<int> units;
  std::size_t start = 0;
  while (start <= body.size()) {
    const auto comma = std::min(body.find(',', start), body.size());
    const std::string part = body.substr(start, comma - start);
    int value = 0;
    const auto [end, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    if (part.empty() || ec != std::errc() || end != part.data() + part.size() || value <= 0) {
      throw UsageError("bad architecture \"" + text + "\": expected positive layer sizes like <100,15,5>");
    }
    units.push_back(value);
    start = comma + 1;
  }
  return units;
}

std::string family(const ModelConfig& config) {
  return std::visit(
      [](const auto& c) -> std::string {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, RnnConfig>) return "rnn";
        else if constexpr (std::is_same_v<T, CnnConfig>) return "cnn";
        else return "svm";
      },
      config);
}

FeatureSet feature_set(const ModelConfig& config) {
  return std::visit([](const auto& c) { return c.feature_set(); }, config);
}

void validate(const ModelConfig& config) {
  std::visit(
      [](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (!std::is_same_v<T, SvmConfig>) c.validate();
      },
      config);
}

std::string describe(const ModelConfig& config) {
  if (const auto* r = std::get_if<RnnConfig>(&config)) {
    std::string arch = "<";
    for (std::size_t i = 0; i < r->hidden_units.size(); ++i) {
      if (i) arch += ",";
      arch += std::to_string(r->hidden_units[i]);
    }
    return "rnn " + arch + "> " + r->features;
  }
  if (const auto* c = std::get_if<CnnConfig>(&config)) {
    return "cnn w" + std::to_string(c->window) + " " + c->feature_set().to_string();
  }
  return "svm " + to_string(std::get<SvmConfig>(config).kernel);
}

std::string to_json(const ModelConfig& config) {
  json j;
  if (const auto* r = std::get_if<RnnConfig>(&config)) {
    j = {{"family", "rnn"},      {"hidden_units", r->hidden_units}, {"features", r->features},
         {"dropout", r->dropout}, {"l1", r->l1},                    {"l2", r->l2},
         {"learning_rate", r->learning_rate}, {"batch_size", r->batch_size}};
  } else if (const auto* c = std::get_if<CnnConfig>(&config)) {
    j = {{"family", "cnn"},
         {"window", c->window},
         {"filters_per_size", c->filters_per_size},
         {"filter_sizes", c->filter_sizes},
         {"dropout", c->dropout},
         {"norm_cap", c->norm_cap},
         {"batch_size", c->batch_size},
         {"word_dim", c->word_dim},
         {"entity_dim", c->entity_dim},
         {"position_dim", c->position_dim},
         {"use_entity", c->use_entity},
         {"use_position", c->use_position},
         {"learning_rate", c->learning_rate}};
  } else {
    const auto& s = std::get<SvmConfig>(config);
    j = {{"family", "svm"}, {"kernel", to_string(s.kernel)}, {"c", s.c},
         {"degree", s.degree}, {"coef0", s.coef0}, {"tolerance", s.tolerance}, {"cache_mb", s.cache_mb}};
  }
  return j.dump();
}

ModelConfig parse_model_config(const std::string& json_text) {
  const json j = json::parse(json_text);
  const auto fam = j.at("family").get<std::string>();
  if (fam == "rnn") {
    RnnConfig r;
    r.hidden_units = j.at("hidden_units").get<std::vector<int>>();
    r.features = j.at("features").get<std::string>();
    r.dropout = j.at("dropout").get<double>();
    r.l1 = j.at("l1").get<double>();
    r.l2 = j.at("l2").get<double>();
    r.learning_rate = j.at("learning_rate").get<double>();
    r.batch_size = j.at("batch_size").get<int>();
    return r;
  }
  if (fam == "cnn") {
    CnnConfig c;
    c.window = j.at("window").get<int>();
    c.filters_per_size = j.at("filters_per_size").get<int>();
    c.filter_sizes = j.at("filter_sizes").get<std::vector<int>>();
    c.dropout = j.at("dropout").get<double>();
    c.norm_cap = j.at("norm_cap").get<double>();
    c.batch_size = j.at("batch_size").get<int>();
    c.word_dim = j.at("word_dim").get<int>();
    c.entity_dim = j.at("entity_dim").get<int>();
    c.position_dim = j.at("position_dim").get<int>();
    c.use_entity = j.at("use_entity").get<bool>();
    c.use_position = j.at("use_position").get<bool>();
    c.learning_rate = j.at("learning_rate").get<double>();
    return c;
  }
  if (fam == "svm") {
    SvmConfig s;
    s.kernel = svm_kernel_from_string(j.at("kernel").get<std::string>());
    s.c = j.at("c").get<double>();
    s.degree = j.at("degree").get<int>();
    s.coef0 = j.at("coef0").get<double>();
    s.tolerance = j.at("tolerance").get<double>();
    s.cache_mb = j.at("cache_mb").get<std::size_t>();
    return s;
  }
  throw UsageError("unknown model family \"" + fam + "\"");
}

}  // namespace oed::models
