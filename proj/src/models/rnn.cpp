#include "oed/models/rnn.hpp"

#include <cmath>

#include <json.hpp>

#include "oed/featurize/vocabulary.hpp"

namespace oed::models {

using featurize::FeatureKind;

namespace {

constexpr std::uint64_t kInitStream = 0x494e4954;  // "INIT"

RowVector sigmoid_row(const RowVector& z) {
  RowVector out(z.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) out(k) = sigmoid(z(k));
  return out;
}

}  // namespace

BiLstmClassifier::BiLstmClassifier(RnnConfig config, const featurize::FeatureContext& context, std::uint64_t seed)
    : config_(std::move(config)), adam_(Adam::Options{config_.learning_rate}) {
  config_.validate();
  features_ = config_.feature_set();
  Rng init = Rng(seed).derive(kInitStream);

  Eigen::Index offset = 0;
  for (FeatureKind kind : features_.kinds()) {
    const auto width = static_cast<Eigen::Index>(featurize::dim(kind));
    segments_.push_back({kind, offset, width});
    offset += width;
    if (kind == FeatureKind::W) {
      if (!context.words) throw ModelError("feature W needs a word vocabulary");
      tables_.emplace(kind, Parameter("table/W", context.words->initial_table(seed)));
    } else if (featurize::is_categorical(kind)) {
      const auto rows = static_cast<Eigen::Index>(context.table_rows(kind));
      tables_.emplace(kind, Parameter("table/" + std::string(featurize::to_string(kind)),
                                      uniform_matrix(rows, width, -0.05, 0.05, init)));
    }
  }
  input_width_ = static_cast<std::size_t>(offset);

  Eigen::Index in = offset;
  for (std::size_t l = 0; l < config_.hidden_units.size(); ++l) {
    const int h = config_.hidden_units[l];
    Layer layer;
    layer.units = h;
    auto make_direction = [&](const std::string& prefix) {
      Direction d;
      d.w_input = Parameter(prefix + "/w_input", glorot_uniform(4 * h, in, static_cast<double>(in), 4.0 * h, init));
      d.w_hidden = Parameter(prefix + "/w_hidden", orthogonal(4 * h, h, init));
      Matrix bias = Matrix::Zero(4 * h, 1);
      bias.block(h, 0, h, 1).setOnes();  // forget gate starts open
      d.bias = Parameter(prefix + "/bias", bias);
      return d;
    };
    const std::string prefix = "lstm" + std::to_string(l);
    layer.forward = make_direction(prefix + "/fwd");
    layer.backward = make_direction(prefix + "/bwd");
    layers_.push_back(std::move(layer));
    in = 2 * h;
  }
  dense_w_ = Parameter("dense/w", glorot_uniform(1, in, static_cast<double>(in), 1.0, init));
  dense_b_ = Parameter("dense/b", Matrix::Zero(1, 1));
}

std::vector<int> BiLstmClassifier::layer_units() const {
  std::vector<int> out;
  for (const auto& l : layers_) out.push_back(l.units);
  return out;
}

std::vector<Parameter*> BiLstmClassifier::parameters() {
  std::vector<Parameter*> out;
  for (auto& [kind, table] : tables_) out.push_back(&table);
  for (auto& l : layers_) {
    for (Direction* d : {&l.forward, &l.backward}) {
      out.push_back(&d->w_input);
      out.push_back(&d->w_hidden);
      out.push_back(&d->bias);
    }
  }
  out.push_back(&dense_w_);
  out.push_back(&dense_b_);
  return out;
}

std::vector<const Parameter*> BiLstmClassifier::parameters() const {
  auto mutable_params = const_cast<BiLstmClassifier*>(this)->parameters();
  return {mutable_params.begin(), mutable_params.end()};
}

const Parameter* BiLstmClassifier::table(FeatureKind kind) const {
  auto it = tables_.find(kind);
  return it == tables_.end() ? nullptr : &it->second;
}

RowMatrix BiLstmClassifier::assemble(const FeaturizedSentence& s) const {
  const auto t_count = static_cast<Eigen::Index>(s.size());
  RowMatrix x(t_count, static_cast<Eigen::Index>(input_width_));
  for (Eigen::Index t = 0; t < t_count; ++t) {
    const auto& bundle = s.tokens[static_cast<std::size_t>(t)];
    for (const auto& seg : segments_) {
      if (auto table = tables_.find(seg.kind); table != tables_.end()) {
        auto idx = bundle.indices.find(seg.kind);
        if (idx == bundle.indices.end()) {
          throw ModelError("sentence \"" + s.id + "\" lacks feature " + std::string(featurize::to_string(seg.kind)));
        }
        int row = idx->second;
        if (row < 0 || row >= table->second.value.rows()) row = featurize::Vocabulary::kUnknown;
        x.row(t).segment(seg.offset, seg.width) = table->second.value.row(row);
      } else {
        auto vec = bundle.vectors.find(seg.kind);
        if (vec == bundle.vectors.end() || static_cast<Eigen::Index>(vec->second.size()) != seg.width) {
          throw ModelError("sentence \"" + s.id + "\" lacks a " + std::to_string(seg.width) + "-d " +
                           std::string(featurize::to_string(seg.kind)) + " vector");
        }
        for (Eigen::Index k = 0; k < seg.width; ++k) x(t, seg.offset + k) = vec->second[static_cast<std::size_t>(k)];
      }
    }
  }
  return x;
}

void BiLstmClassifier::run_direction(const Direction& d, int units, const RowMatrix& in, bool reverse,
                                     DirectionCache& cache) {
  const Eigen::Index t_count = in.rows();
  const Eigen::Index h = units;
  RowMatrix z_in = in * d.w_input.value.transpose();
  z_in.rowwise() += d.bias.value.col(0).transpose();
  for (RowMatrix* m : {&cache.i, &cache.f, &cache.g, &cache.o, &cache.c, &cache.tanh_c, &cache.h}) {
    m->resize(t_count, h);
  }
  RowVector h_prev = RowVector::Zero(h);
  RowVector c_prev = RowVector::Zero(h);
  for (Eigen::Index s = 0; s < t_count; ++s) {
    const Eigen::Index t = reverse ? t_count - 1 - s : s;
    const RowVector z = z_in.row(t) + h_prev * d.w_hidden.value.transpose();
    const RowVector i = sigmoid_row(z.segment(0, h));
    const RowVector f = sigmoid_row(z.segment(h, h));
    const RowVector g = z.segment(2 * h, h).array().tanh().matrix();
    const RowVector o = sigmoid_row(z.segment(3 * h, h));
    const RowVector c = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
    const RowVector tc = c.array().tanh().matrix();
    const RowVector out = o.cwiseProduct(tc);
    cache.i.row(t) = i;
    cache.f.row(t) = f;
    cache.g.row(t) = g;
    cache.o.row(t) = o;
    cache.c.row(t) = c;
    cache.tanh_c.row(t) = tc;
    cache.h.row(t) = out;
    h_prev = out;
    c_prev = c;
  }
}

RowMatrix BiLstmClassifier::backprop_direction(Direction& d, int units, const RowMatrix& in, bool reverse,
                                               const DirectionCache& cache, const RowMatrix& d_out) {
  const Eigen::Index t_count = in.rows();
  const Eigen::Index h = units;
  RowMatrix dz_all(t_count, 4 * h);
  RowVector dh_next = RowVector::Zero(h);
  RowVector dc_next = RowVector::Zero(h);
  for (Eigen::Index s = t_count - 1; s >= 0; --s) {
    const Eigen::Index t = reverse ? t_count - 1 - s : s;
    const bool has_prev = s > 0;
    const Eigen::Index prev = reverse ? t + 1 : t - 1;

    const RowVector dh = d_out.row(t) + dh_next;
    const auto i = cache.i.row(t).array();
    const auto f = cache.f.row(t).array();
    const auto g = cache.g.row(t).array();
    const auto o = cache.o.row(t).array();
    const auto tc = cache.tanh_c.row(t).array();
    const Eigen::ArrayXXd zero = Eigen::ArrayXXd::Zero(1, h);

    const Eigen::Array<double, 1, Eigen::Dynamic> dc = dc_next.array() + dh.array() * o * (1.0 - tc * tc);
    const Eigen::Array<double, 1, Eigen::Dynamic> c_prev =
        has_prev ? Eigen::Array<double, 1, Eigen::Dynamic>(cache.c.row(prev).array())
                 : Eigen::Array<double, 1, Eigen::Dynamic>(zero);

    RowVector dz(4 * h);
    dz.segment(0, h) = (dc * g * i * (1.0 - i)).matrix();
    dz.segment(h, h) = (dc * c_prev * f * (1.0 - f)).matrix();
    dz.segment(2 * h, h) = (dc * i * (1.0 - g * g)).matrix();
    dz.segment(3 * h, h) = (dh.array() * tc * o * (1.0 - o)).matrix();
    dz_all.row(t) = dz;

    dc_next = (dc * f).matrix();
    if (has_prev) d.w_hidden.grad.noalias() += dz.transpose() * cache.h.row(prev);
    dh_next = dz * d.w_hidden.value;
  }
  d.w_input.grad.noalias() += dz_all.transpose() * in;
  d.bias.grad.col(0) += dz_all.colwise().sum().transpose();
  return dz_all * d.w_input.value;
}

void BiLstmClassifier::forward(const FeaturizedSentence& s, Rng* dropout_rng, Pass& pass) const {
  RowMatrix x = assemble(s);
  if (dropout_rng && config_.dropout > 0) {
    const double keep = 1.0 - config_.dropout;
    pass.dropout_mask.resize(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      for (Eigen::Index c = 0; c < x.cols(); ++c) {
        pass.dropout_mask(r, c) = dropout_rng->bernoulli(keep) ? 1.0 / keep : 0.0;
      }
    }
    x = x.cwiseProduct(pass.dropout_mask);
  } else {
    pass.dropout_mask.resize(0, 0);
  }
  pass.layers.resize(layers_.size());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    auto& cache = pass.layers[l];
    cache.input = l == 0 ? std::move(x) : pass.top;
    run_direction(layers_[l].forward, layers_[l].units, cache.input, false, cache.forward);
    run_direction(layers_[l].backward, layers_[l].units, cache.input, true, cache.backward);
    pass.top.resize(cache.input.rows(), 2 * layers_[l].units);
    pass.top << cache.forward.h, cache.backward.h;
  }
  pass.logits = pass.top * dense_w_.value.transpose();
  pass.logits.array() += dense_b_.value(0, 0);
}

void BiLstmClassifier::backward(const FeaturizedSentence& s, const Pass& pass, double scale) {
  const Eigen::Index t_count = pass.logits.size();
  Vector d_logits(t_count);
  for (Eigen::Index t = 0; t < t_count; ++t) {
    d_logits(t) = (sigmoid(pass.logits(t)) - static_cast<double>(s.labels[static_cast<std::size_t>(t)])) * scale;
  }
  dense_w_.grad.noalias() += d_logits.transpose() * pass.top;
  dense_b_.grad(0, 0) += d_logits.sum();
  RowMatrix d_top = d_logits * dense_w_.value;

  for (std::size_t l = layers_.size(); l-- > 0;) {
    auto& layer = layers_[l];
    const auto& cache = pass.layers[l];
    const Eigen::Index h = layer.units;
    RowMatrix d_in = backprop_direction(layer.forward, layer.units, cache.input, false, cache.forward, d_top.leftCols(h));
    d_in += backprop_direction(layer.backward, layer.units, cache.input, true, cache.backward, d_top.rightCols(h));
    d_top = std::move(d_in);
  }

  if (tables_.empty()) return;
  if (pass.dropout_mask.size() > 0) d_top = d_top.cwiseProduct(pass.dropout_mask);
  for (const auto& seg : segments_) {
    auto table = tables_.find(seg.kind);
    if (table == tables_.end()) continue;
    for (Eigen::Index t = 0; t < t_count; ++t) {
      int row = s.tokens[static_cast<std::size_t>(t)].indices.at(seg.kind);
      if (row < 0 || row >= table->second.value.rows()) row = featurize::Vocabulary::kUnknown;
      table->second.grad.row(row) += d_top.row(t).segment(seg.offset, seg.width);
    }
  }
}

double BiLstmClassifier::penalty() const {
  double total = 0;
  for (const auto& l : layers_) {
    for (const Direction* d : {&l.forward, &l.backward}) {
      for (const Parameter* p : {&d->w_input, &d->w_hidden}) {
        total += config_.l1 * p->value.cwiseAbs().sum() + config_.l2 * p->value.squaredNorm();
      }
    }
  }
  return total;
}

void BiLstmClassifier::add_penalty_gradient() {
  for (auto& l : layers_) {
    for (Direction* d : {&l.forward, &l.backward}) {
      for (Parameter* p : {&d->w_input, &d->w_hidden}) {
        p->grad.array() += config_.l1 * p->value.array().sign() + 2.0 * config_.l2 * p->value.array();
      }
    }
  }
}

double BiLstmClassifier::loss_and_gradient(std::span<const FeaturizedSentence> batch, Rng* dropout_rng) {
  for (Parameter* p : parameters()) p->zero_grad();
  std::size_t tokens = 0;
  for (const auto& s : batch) tokens += s.size();
  if (tokens == 0) return penalty();
  const double scale = 1.0 / static_cast<double>(tokens);
  double data_loss = 0;
  Pass pass;
  for (const auto& s : batch) {
    forward(s, dropout_rng, pass);
    for (Eigen::Index t = 0; t < pass.logits.size(); ++t) {
      data_loss += bce_with_logit(pass.logits(t), s.labels[static_cast<std::size_t>(t)]);
    }
    backward(s, pass, scale);
  }
  add_penalty_gradient();
  return data_loss * scale + penalty();
}

double BiLstmClassifier::loss(std::span<const FeaturizedSentence> batch) const {
  std::size_t tokens = 0;
  double data_loss = 0;
  Pass pass;
  for (const auto& s : batch) {
    forward(s, nullptr, pass);
    tokens += s.size();
    for (Eigen::Index t = 0; t < pass.logits.size(); ++t) {
      data_loss += bce_with_logit(pass.logits(t), s.labels[static_cast<std::size_t>(t)]);
    }
  }
  return (tokens ? data_loss / static_cast<double>(tokens) : 0.0) + penalty();
}

std::vector<double> BiLstmClassifier::predict_proba(const FeaturizedSentence& sentence) const {
  if (sentence.size() == 0) return {};
  Pass pass;
  forward(sentence, nullptr, pass);
  std::vector<double> out(sentence.size());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = sigmoid(pass.logits(static_cast<Eigen::Index>(t)));
  return out;
}

double BiLstmClassifier::train_epoch(std::span<const FeaturizedSentence> train, Rng& rng) {
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(std::span<std::size_t>(order));

  const auto params = parameters();
  const auto batch_size = static_cast<std::size_t>(config_.batch_size);
  double total = 0;
  std::size_t batches = 0;
  std::vector<FeaturizedSentence> batch;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    batch.clear();
    for (std::size_t k = start; k < std::min(order.size(), start + batch_size); ++k) batch.push_back(train[order[k]]);
    const double l = loss_and_gradient(batch, &rng);
    if (!std::isfinite(l)) return l;
    adam_.step(params);
    total += l;
    ++batches;
  }
  return batches ? total / static_cast<double>(batches) : 0.0;
}

std::string BiLstmClassifier::serialize() const { return serialize_parameters(parameters()); }

void BiLstmClassifier::deserialize(std::string_view blob) { deserialize_parameters(blob, parameters()); }

std::string BiLstmClassifier::config_json() const { return to_json(ModelConfig(config_)); }

}  // namespace oed::models
