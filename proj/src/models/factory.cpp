#include "oed/models/factory.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "oed/models/cnn.hpp"
#include "oed/models/rnn.hpp"
#include "oed/models/svm.hpp"

namespace oed::models {

namespace fs = std::filesystem;
using featurize::FeatureKind;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  out << data;
  if (!out) throw ModelError("cannot write " + path.string());
}

std::string vocab_file(FeatureKind kind) { return "vocab-" + std::string(featurize::to_string(kind)) + ".txt"; }

}  // namespace

std::unique_ptr<TokenClassifier> make_classifier(const ModelConfig& config, const featurize::FeatureContext& context,
                                                 std::uint64_t seed) {
  validate(config);
  if (const auto* r = std::get_if<RnnConfig>(&config)) return std::make_unique<BiLstmClassifier>(*r, context, seed);
  if (const auto* c = std::get_if<CnnConfig>(&config)) return std::make_unique<WindowCnnClassifier>(*c, context, seed);
  return std::make_unique<SvmClassifier>(std::get<SvmConfig>(config), context);
}

void save_checkpoint(const fs::path& dir, const ModelConfig& config, const TokenClassifier& classifier,
                     const featurize::FeatureContext& context) {
  fs::create_directories(dir);
  json meta;
  meta["model"] = json::parse(to_json(config));
  meta["vocabularies"] = json::array();
  for (const auto& [kind, vocab] : context.tag_vocabs) {
    vocab.vocab.save(dir / vocab_file(kind));
    meta["vocabularies"].push_back(featurize::to_string(kind));
  }
  if (context.words) {
    context.words->vocab.save(dir / vocab_file(FeatureKind::W));
    meta["vocabularies"].push_back("W");
    meta["word_dim"] = context.words->dim;
  }
  write_file(dir / "config.json", meta.dump(2) + "\n");
  write_file(dir / "weights.bin", classifier.serialize());
}

Checkpoint load_checkpoint(const fs::path& dir) {
  json meta;
  try {
    meta = json::parse(read_file(dir / "config.json"));
  } catch (const json::exception& e) {
    throw ModelError("bad checkpoint config in " + dir.string() + ": " + e.what());
  }
  Checkpoint cp{parse_model_config(meta.at("model").dump()), {}, nullptr};
  for (const auto& name : meta.at("vocabularies")) {
    const auto parsed = featurize::kind_from_string(name.get<std::string>());
    if (!parsed) throw ModelError("unknown vocabulary kind in checkpoint: " + name.dump());
    const FeatureKind kind = *parsed;
    auto vocab = featurize::Vocabulary::load(dir / vocab_file(kind));
    if (kind == FeatureKind::W) {
      cp.context.words = featurize::WordEmbeddings{std::move(vocab), meta.value("word_dim", std::size_t{300}), {}};
    } else {
      cp.context.tag_vocabs[kind] = featurize::TagVocabulary{kind, std::move(vocab)};
    }
  }
  cp.classifier = make_classifier(cp.config, cp.context, 0);
  cp.classifier->deserialize(read_file(dir / "weights.bin"));
  cp.classifier->mark_fitted();
  return cp;
}

}  // namespace oed::models
