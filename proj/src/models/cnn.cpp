#include "oed/models/cnn.hpp"

#include <algorithm>
#include <cmath>

#include "oed/featurize/vocabulary.hpp"

namespace oed::models {

using featurize::FeatureKind;
using featurize::Vocabulary;

namespace {

constexpr std::uint64_t kInitStream = 0x434e4e49;  // "CNNI"
constexpr std::size_t kPredictChunk = 256;

int lookup(const featurize::FeatureBundle& bundle, FeatureKind kind, Eigen::Index rows, const std::string& id) {
  auto it = bundle.indices.find(kind);
  if (it == bundle.indices.end()) {
    throw ModelError("sentence \"" + id + "\" lacks feature " + std::string(featurize::to_string(kind)));
  }
  return it->second >= 0 && it->second < rows ? it->second : Vocabulary::kUnknown;
}

}  // namespace

WindowCnnClassifier::WindowCnnClassifier(CnnConfig config, const featurize::FeatureContext& context,
                                         std::uint64_t seed)
    : config_(std::move(config)), adam_(Adam::Options{config_.learning_rate}) {
  config_.validate();
  if (!context.words) throw ModelError("the CNN needs a word vocabulary");
  Rng init = Rng(seed).derive(kInitStream);
  words_ = Parameter("table/W", context.words->initial_table(seed));
  if (words_.value.cols() != config_.word_dim) throw ModelError("word table width does not match word_dim");
  if (config_.use_entity) {
    const auto rows = static_cast<Eigen::Index>(context.table_rows(FeatureKind::E));
    entities_ = Parameter("table/E", uniform_matrix(rows, config_.entity_dim, -0.05, 0.05, init));
  }
  if (config_.use_position) {
    positions_ = Parameter("table/Po", uniform_matrix(config_.window, config_.position_dim, -0.05, 0.05, init));
  }
  const Eigen::Index d = config_.token_width();
  const Eigen::Index f = config_.filters_per_size;
  for (int width : config_.filter_sizes) {
    const std::string name = "conv" + std::to_string(width);
    convs_.push_back({width,
                      Parameter(name + "/kernel", glorot_uniform(width * d, f, static_cast<double>(width * d),
                                                                 static_cast<double>(width * f), init)),
                      Parameter(name + "/bias", Matrix::Zero(1, f))});
  }
  const Eigen::Index total = config_.total_filters();
  dense_w_ = Parameter("dense/w", glorot_uniform(1, total, static_cast<double>(total), 1.0, init));
  dense_b_ = Parameter("dense/b", Matrix::Zero(1, 1));
}

std::vector<Parameter*> WindowCnnClassifier::parameters() {
  std::vector<Parameter*> out{&words_};
  if (config_.use_entity) out.push_back(&entities_);
  if (config_.use_position) out.push_back(&positions_);
  for (auto& c : convs_) {
    out.push_back(&c.kernel);
    out.push_back(&c.bias);
  }
  out.push_back(&dense_w_);
  out.push_back(&dense_b_);
  return out;
}

std::vector<const Parameter*> WindowCnnClassifier::parameters() const {
  auto p = const_cast<WindowCnnClassifier*>(this)->parameters();
  return {p.begin(), p.end()};
}

std::vector<const Parameter*> WindowCnnClassifier::embedding_tables() const {
  std::vector<const Parameter*> out{&words_};
  if (config_.use_entity) out.push_back(&entities_);
  if (config_.use_position) out.push_back(&positions_);
  return out;
}

WindowCnnClassifier::Rows WindowCnnClassifier::rows_for(const FeaturizedSentence& s, long column, int slot) const {
  Rows r{Vocabulary::kPad, Vocabulary::kPad, slot};
  if (column == WindowInstance::kPad) return r;
  const auto& bundle = s.tokens[static_cast<std::size_t>(column)];
  r.word = lookup(bundle, FeatureKind::W, words_.value.rows(), s.id);
  if (config_.use_entity) r.entity = lookup(bundle, FeatureKind::E, entities_.value.rows(), s.id);
  return r;
}

void WindowCnnClassifier::forward(std::span<const WindowRef> batch, Rng* dropout_rng, Pass& pass) const {
  const Eigen::Index b_count = static_cast<Eigen::Index>(batch.size());
  const Eigen::Index w = config_.window;
  const Eigen::Index d = config_.token_width();
  const Eigen::Index wd = config_.word_dim;
  const Eigen::Index ed = config_.use_entity ? config_.entity_dim : 0;

  pass.x.resize(b_count * w, d);
  for (Eigen::Index b = 0; b < b_count; ++b) {
    const auto& ref = batch[static_cast<std::size_t>(b)];
    for (Eigen::Index slot = 0; slot < w; ++slot) {
      const Rows r = rows_for(*ref.sentence, ref.window.columns[static_cast<std::size_t>(slot)], static_cast<int>(slot));
      auto row = pass.x.row(b * w + slot);
      row.segment(0, wd) = words_.value.row(r.word);
      if (config_.use_entity) row.segment(wd, ed) = entities_.value.row(r.entity);
      if (config_.use_position) row.segment(wd + ed, config_.position_dim) = positions_.value.row(r.position);
    }
  }

  const Eigen::Index f = config_.filters_per_size;
  pass.pooled.resize(b_count, config_.total_filters());
  pass.convs.resize(convs_.size());
  for (std::size_t ci = 0; ci < convs_.size(); ++ci) {
    const auto& conv = convs_[ci];
    auto& cache = pass.convs[ci];
    const Eigen::Index k = conv.width;
    const Eigen::Index positions = w - k + 1;
    cache.columns.resize(b_count * positions, k * d);
    for (Eigen::Index b = 0; b < b_count; ++b) {
      for (Eigen::Index p = 0; p < positions; ++p) {
        // consecutive rows of a row-major matrix are one contiguous span
        cache.columns.row(b * positions + p) = Eigen::Map<const RowVector>(pass.x.row(b * w + p).data(), k * d);
      }
    }
    cache.act = cache.columns * conv.kernel.value;
    cache.act.rowwise() += conv.bias.value.row(0);
    cache.act = cache.act.array().tanh().matrix();
    cache.argmax.assign(static_cast<std::size_t>(b_count * f), 0);
    for (Eigen::Index b = 0; b < b_count; ++b) {
      for (Eigen::Index j = 0; j < f; ++j) {
        Eigen::Index best = 0;
        double value = cache.act(b * positions, j);
        for (Eigen::Index p = 1; p < positions; ++p) {
          if (cache.act(b * positions + p, j) > value) {
            value = cache.act(b * positions + p, j);
            best = p;
          }
        }
        cache.argmax[static_cast<std::size_t>(b * f + j)] = best;
        pass.pooled(b, static_cast<Eigen::Index>(ci) * f + j) = value;
      }
    }
  }

  RowMatrix dropped = pass.pooled;
  if (dropout_rng && config_.dropout > 0) {
    const double keep = 1.0 - config_.dropout;
    pass.mask.resize(pass.pooled.rows(), pass.pooled.cols());
    for (Eigen::Index i = 0; i < pass.mask.size(); ++i) {
      pass.mask.data()[i] = dropout_rng->bernoulli(keep) ? 1.0 / keep : 0.0;
    }
    dropped = dropped.cwiseProduct(pass.mask);
  } else {
    pass.mask.resize(0, 0);
  }
  pass.logits = dropped * dense_w_.value.transpose();
  pass.logits.array() += dense_b_.value(0, 0);
}

double WindowCnnClassifier::step(std::span<const WindowRef> batch, Rng& rng) {
  for (Parameter* p : parameters()) p->zero_grad();
  Pass pass;
  forward(batch, &rng, pass);

  const Eigen::Index b_count = static_cast<Eigen::Index>(batch.size());
  const double scale = 1.0 / static_cast<double>(b_count);
  double loss = 0;
  Vector d_logits(b_count);
  for (Eigen::Index b = 0; b < b_count; ++b) {
    const auto& ref = batch[static_cast<std::size_t>(b)];
    const double y = ref.sentence->labels[ref.window.center];
    loss += bce_with_logit(pass.logits(b), y);
    d_logits(b) = (sigmoid(pass.logits(b)) - y) * scale;
  }

  RowMatrix dropped = pass.mask.size() > 0 ? RowMatrix(pass.pooled.cwiseProduct(pass.mask)) : pass.pooled;
  dense_w_.grad.noalias() += d_logits.transpose() * dropped;
  dense_b_.grad(0, 0) += d_logits.sum();
  RowMatrix d_pooled = d_logits * dense_w_.value;
  if (pass.mask.size() > 0) d_pooled = d_pooled.cwiseProduct(pass.mask);

  const Eigen::Index w = config_.window;
  const Eigen::Index d = config_.token_width();
  const Eigen::Index f = config_.filters_per_size;
  RowMatrix dx = RowMatrix::Zero(b_count * w, d);
  for (std::size_t ci = 0; ci < convs_.size(); ++ci) {
    auto& conv = convs_[ci];
    const auto& cache = pass.convs[ci];
    const Eigen::Index k = conv.width;
    const Eigen::Index positions = w - k + 1;
    RowMatrix dz = RowMatrix::Zero(b_count * positions, f);
    for (Eigen::Index b = 0; b < b_count; ++b) {
      for (Eigen::Index j = 0; j < f; ++j) {
        const Eigen::Index row = b * positions + cache.argmax[static_cast<std::size_t>(b * f + j)];
        const double a = cache.act(row, j);
        dz(row, j) = d_pooled(b, static_cast<Eigen::Index>(ci) * f + j) * (1.0 - a * a);
      }
    }
    conv.kernel.grad.noalias() += cache.columns.transpose() * dz;
    conv.bias.grad.row(0) += dz.colwise().sum();
    const RowMatrix d_columns = dz * conv.kernel.value.transpose();
    for (Eigen::Index b = 0; b < b_count; ++b) {
      for (Eigen::Index p = 0; p < positions; ++p) {
        Eigen::Map<RowVector>(dx.row(b * w + p).data(), k * d) += d_columns.row(b * positions + p);
      }
    }
  }

  const Eigen::Index wd = config_.word_dim;
  const Eigen::Index ed = config_.use_entity ? config_.entity_dim : 0;
  for (Eigen::Index b = 0; b < b_count; ++b) {
    const auto& ref = batch[static_cast<std::size_t>(b)];
    for (Eigen::Index slot = 0; slot < w; ++slot) {
      const Rows r = rows_for(*ref.sentence, ref.window.columns[static_cast<std::size_t>(slot)], static_cast<int>(slot));
      const auto g = dx.row(b * w + slot);
      words_.grad.row(r.word) += g.segment(0, wd);
      if (config_.use_entity) entities_.grad.row(r.entity) += g.segment(wd, ed);
      if (config_.use_position) positions_.grad.row(r.position) += g.segment(wd + ed, config_.position_dim);
    }
  }

  adam_.step(parameters());
  apply_norm_cap();
  return loss * scale;
}

void WindowCnnClassifier::apply_norm_cap() {
  for (Parameter* table : {&words_, &entities_, &positions_}) {
    for (Eigen::Index r = 0; r < table->value.rows(); ++r) {
      const double norm = table->value.row(r).norm();
      if (norm > config_.norm_cap) table->value.row(r) *= config_.norm_cap / norm;
    }
  }
}

double WindowCnnClassifier::train_epoch(std::span<const FeaturizedSentence> train, Rng& rng) {
  std::vector<WindowRef> refs;
  for (const auto& s : train) {
    for (auto& w : extract_windows(s.size(), config_.window)) refs.push_back({&s, std::move(w)});
  }
  rng.shuffle(std::span<WindowRef>(refs));
  const auto batch_size = static_cast<std::size_t>(config_.batch_size);
  double total = 0;
  std::size_t batches = 0;
  for (std::size_t start = 0; start < refs.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, refs.size() - start);
    const double l = step(std::span<const WindowRef>(refs).subspan(start, n), rng);
    if (!std::isfinite(l)) return l;
    total += l;
    ++batches;
  }
  return batches ? total / static_cast<double>(batches) : 0.0;
}

std::vector<double> WindowCnnClassifier::predict_proba(const FeaturizedSentence& sentence) const {
  std::vector<WindowRef> refs;
  for (auto& w : extract_windows(sentence.size(), config_.window)) refs.push_back({&sentence, std::move(w)});
  std::vector<double> out;
  out.reserve(refs.size());
  Pass pass;
  for (std::size_t start = 0; start < refs.size(); start += kPredictChunk) {
    const std::size_t n = std::min(kPredictChunk, refs.size() - start);
    forward(std::span<const WindowRef>(refs).subspan(start, n), nullptr, pass);
    for (Eigen::Index b = 0; b < pass.logits.size(); ++b) out.push_back(sigmoid(pass.logits(b)));
  }
  return out;
}

double WindowCnnClassifier::predict_window(const FeaturizedSentence& sentence, const WindowInstance& window) const {
  if (static_cast<int>(window.columns.size()) != config_.window) throw ModelError("window width does not match the model");
  const WindowRef ref{&sentence, window};
  Pass pass;
  forward(std::span<const WindowRef>(&ref, 1), nullptr, pass);
  return sigmoid(pass.logits(0));
}

std::string WindowCnnClassifier::serialize() const { return serialize_parameters(parameters()); }

void WindowCnnClassifier::deserialize(std::string_view blob) { deserialize_parameters(blob, parameters()); }

std::string WindowCnnClassifier::config_json() const { return to_json(ModelConfig(config_)); }

}  // namespace oed::models
