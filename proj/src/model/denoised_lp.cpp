// Copyright 2026 The DenoisedLP Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dlp/model/denoised_lp.hpp"

#include <cmath>
#include <string>

#include "dlp/common/error.hpp"

namespace dlp::model {

namespace {

std::string flag(bool b) { return b ? "1" : "0"; }

bool parse_flag(const std::string& s) {
  if (s == "1" || s == "true") return true;
  if (s == "0" || s == "false") return false;
  throw ParseError(0, "bad boolean '" + s + "' in checkpoint metadata");
}

std::string number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void store_config(const ModelConfig& c, ad::Checkpoint& ck) {
  ck.set_meta("model.estimator", std::string(to_string(c.estimator)));
  ck.set_meta("model.projection_activation", c.projection_activation == Activation::relu ? "relu" : "identity");
  ck.set_meta("model.hidden", std::to_string(c.hidden));
  ck.set_meta("model.gcn_layers", std::to_string(c.gcn_layers));
  ck.set_meta("model.rgnn_layers", std::to_string(c.rgnn_layers));
  ck.set_meta("model.self_term", flag(c.self_term));
  ck.set_meta("model.temperature", number(c.temperature));
  ck.set_meta("model.tau", number(c.tau));
  ck.set_meta("model.lambda", number(c.lambda));
  ck.set_meta("model.ablate.srl", flag(c.ablate.srl));
  ck.set_meta("model.ablate.ssp", flag(c.ablate.ssp));
  ck.set_meta("model.ablate.mi", flag(c.ablate.mi));
  ck.set_meta("model.task_mode", std::string(kg::to_string(c.mode)));
  ck.set_meta("model.classes", std::to_string(c.classes));
  ck.set_meta("model.fine_tune", flag(c.fine_tune));
}

ModelConfig load_config(const ad::Checkpoint& ck) {
  ModelConfig c;
  c.estimator = parse_estimator(ck.meta("model.estimator"));
  c.projection_activation = ck.meta("model.projection_activation") == "identity" ? Activation::identity : Activation::relu;
  c.hidden = std::stoul(ck.meta("model.hidden"));
  c.gcn_layers = std::stoul(ck.meta("model.gcn_layers"));
  c.rgnn_layers = std::stoul(ck.meta("model.rgnn_layers"));
  c.self_term = parse_flag(ck.meta("model.self_term"));
  c.temperature = std::stod(ck.meta("model.temperature"));
  c.tau = std::stod(ck.meta("model.tau"));
  c.lambda = std::stod(ck.meta("model.lambda"));
  c.ablate.srl = parse_flag(ck.meta("model.ablate.srl"));
  c.ablate.ssp = parse_flag(ck.meta("model.ablate.ssp"));
  c.ablate.mi = parse_flag(ck.meta("model.ablate.mi"));
  c.mode = kg::parse_task_mode(ck.meta("model.task_mode"));
  c.classes = std::stoul(ck.meta("model.classes"));
  c.fine_tune = parse_flag(ck.meta("model.fine_tune"));
  return c;
}

template <typename T>
Parameter<T>& DenoisedLP<T>::add(const std::string& name, std::size_t rows, std::size_t cols, Rng& rng,
                                 double fill) {
  Tensor<T> value(rows, cols);
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (auto& v : value.values()) v = static_cast<T>(fill >= 0.0 ? fill : rng.uniform(-bound, bound));
  auto& p = store_.emplace_back(name, std::move(value));
  if (!by_name_.emplace(name, &p).second) throw ConflictError("duplicate parameter " + name);
  return p;
}

template <typename T>
DenoisedLP<T>::DenoisedLP(ModelConfig config, Tensor<T> entity_features, Tensor<T> relation_features,
                          std::uint64_t seed)
    : config_(config) {
  const std::size_t f = entity_features.cols();
  const std::size_t h = config_.hidden;
  if (f == 0 || h == 0) throw PreconditionError("model: feature and hidden widths must be positive");
  if (relation_features.cols() != f) throw ShapeError("model: relation features must match entity feature width");
  if (relation_features.rows() == 0) throw PreconditionError("model: at least one relation is required");
  if (config_.classes == 0 || (config_.mode == kg::TaskMode::binary && config_.classes != 1)) {
    throw PreconditionError("model: class count does not fit the task mode");
  }
  if (!(config_.temperature > 0) || !(config_.tau > 0) || !(config_.lambda >= 0)) {
    throw PreconditionError("model: temperature and tau must be > 0, lambda >= 0");
  }
  Rng rng(seed);
  entity_ = &store_.emplace_back("features.entity", std::move(entity_features));
  relation_ = &store_.emplace_back("features.relation", std::move(relation_features));
  by_name_.emplace(entity_->name, entity_);
  by_name_.emplace(relation_->name, relation_);
  const std::size_t relations = relation_->value.rows();

  if (!config_.ablate.srl) {
    estimator_.kind = config_.estimator;
    if (config_.estimator != EstimatorKind::cosine) {
      projection_.w0 = &add("srl.mlp.0.weight", f, h, rng);
      projection_.b0 = &add("srl.mlp.0.bias", 1, h, rng, 0.0);
      projection_.w1 = &add("srl.mlp.1.weight", h, h, rng);
      projection_.b1 = &add("srl.mlp.1.bias", 1, h, rng, 0.0);
      projection_.hidden = config_.projection_activation;
    }
    if (config_.estimator == EstimatorKind::attention) estimator_.attention = &add("srl.attention.weight", 2 * h, 1, rng);
    if (config_.estimator == EstimatorKind::weighted_cosine)
      estimator_.cosine_weight = &add("srl.cosine.weight", 1, h, rng, 1.0);
  }
  for (std::size_t l = 0; l < config_.gcn_layers; ++l)
    gcn_.push_back(&add("gcn." + std::to_string(l) + ".weight", l == 0 ? f : h, h, rng));
  sub_weight_ = &add("readout.sub.weight", config_.gcn_layers ? h : f, h, rng);
  sub_bias_ = &add("readout.sub.bias", 1, h, rng, 0.0);

  if (!config_.ablate.ssp) {
    for (std::size_t l = 0; l < config_.rgnn_layers; ++l) {
      const std::string prefix = "rgnn." + std::to_string(l) + ".";
      const std::size_t in = l == 0 ? f : h;
      RgnnLayerParams<T> layer;
      for (std::size_t r = 0; r < relations; ++r)
        layer.relation.push_back(&add(prefix + "relation." + std::to_string(r) + ".weight", in, h, rng));
      layer.gate = &add(prefix + "gate.weight", 3 * in, 1, rng);
      if (config_.self_term) layer.self = &add(prefix + "self.weight", in, h, rng);
      layer.relation_update = &add(prefix + "relation_update.weight", in, h, rng);
      rgnn_.push_back(std::move(layer));
    }
    sem_weight_ = &add("readout.sem.weight", config_.rgnn_layers ? h : f, h, rng);
    sem_bias_ = &add("readout.sem.bias", 1, h, rng, 0.0);
  }
  head_weight_ = &add("classifier.weight", config_.ablate.ssp ? h : 2 * h, config_.classes, rng);
  head_bias_ = &add("classifier.bias", 1, config_.classes, rng, 0.0);
}

template <typename T>
std::vector<Parameter<T>*> DenoisedLP<T>::trainable() {
  std::vector<Parameter<T>*> out;
  for (auto& p : store_)
    if (config_.fine_tune || (&p != entity_ && &p != relation_)) out.push_back(&p);
  return out;
}

template <typename T>
std::vector<Parameter<T>*> DenoisedLP<T>::all_parameters() {
  std::vector<Parameter<T>*> out;
  for (auto& p : store_) out.push_back(&p);
  return out;
}

template <typename T>
Parameter<T>& DenoisedLP<T>::parameter(const std::string& name) {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) throw LookupError("no parameter named " + name);
  return *it->second;
}

template <typename T>
Var<T> DenoisedLP<T>::features(Tape<T>& tape, Parameter<T>& table, std::span<const EntityId> ids) {
  std::vector<std::size_t> rows;
  rows.reserve(ids.size());
  for (EntityId e : ids) {
    if (e.index() >= table.value.rows()) throw LookupError("entity id outside the feature table");
    rows.push_back(e.index());
  }
  if (config_.fine_tune) return ad::gather_rows(tape.leaf(table), std::span<const std::size_t>(rows));
  const std::size_t f = table.value.cols();
  Tensor<T> x(rows.size(), f);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = table.value.row_span(rows[i]);
    std::copy(src.begin(), src.end(), x.row_span(i).begin());
  }
  return tape.constant(std::move(x));
}

template <typename T>
Var<T> DenoisedLP<T>::encode_local(Tape<T>& tape, const sub::LocalSubgraph& local, const ForwardOptions<T>& options,
                                   std::size_t link, BatchOutput<T>& out) {
  const std::size_t n = local.nodes.size();
  auto x = features(tape, *entity_, local.nodes);
  Var<T> adjacency;
  const auto& pairs = local.candidate_pairs;
  if (config_.ablate.srl || pairs.empty()) {
    adjacency = observed_adjacency(tape, n, std::span<const sub::NodePair>(local.observed_edges));
    out.pi.emplace_back();
    out.weights.emplace_back();
    out.kept_edges.push_back(local.observed_edges.size());
  } else {
    auto z = config_.estimator == EstimatorKind::cosine ? x : project_nodes(x, projection_);
    auto pi = reliability(z, x, std::span<const sub::NodePair>(pairs), estimator_);
    auto w = pi;
    if (options.train) {
      Tensor<T> eps(pairs.size(), 1);
      if (!options.epsilon.empty()) {
        if (link >= options.epsilon.size()) throw PreconditionError("forward: missing fixed noise for a link");
        eps = options.epsilon[link];
      } else {
        if (!options.rng) throw PreconditionError("forward: training mode needs an rng or fixed noise");
        for (auto& v : eps.values()) v = open_unit<T>(options.rng->uniform_open());
      }
      w = concrete_relax(pi, eps, static_cast<T>(config_.temperature));
    }
    auto refined = refine(n, std::span<const sub::NodePair>(pairs), w);
    adjacency = refined.adjacency;
    out.pi.push_back(pi.value());
    out.weights.push_back(w.value());
    out.kept_edges.push_back(refined.kept.size());
  }
  return gcn_readout(normalize_adjacency(adjacency), x, std::span<Parameter<T>* const>(gcn_), *sub_weight_,
                     *sub_bias_);
}

template <typename T>
Var<T> DenoisedLP<T>::encode_semantic(Tape<T>& tape, const sub::SemanticSubgraph& semantic) {
  auto x = features(tape, *entity_, semantic.nodes);
  auto e = config_.fine_tune ? tape.leaf(*relation_) : tape.constant(relation_->value);
  return rgnn_readout(x, e, std::span<const sub::SemanticEdge>(semantic.edges),
                      std::span<const RgnnLayerParams<T>>(rgnn_), *sem_weight_, *sem_bias_);
}

template <typename T>
BatchOutput<T> DenoisedLP<T>::forward(Tape<T>& tape, std::span<const LinkInput> batch,
                                      const ForwardOptions<T>& options) {
  if (batch.empty()) throw PreconditionError("forward: empty batch");
  BatchOutput<T> out;
  std::vector<Var<T>> subs, sems;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    if (!batch[b].local) throw PreconditionError("forward: link without a local subgraph");
    subs.push_back(encode_local(tape, *batch[b].local, options, b, out));
    if (!config_.ablate.ssp) {
      if (!batch[b].semantic) throw PreconditionError("forward: link without a semantic subgraph");
      sems.push_back(encode_semantic(tape, *batch[b].semantic));
    }
  }
  out.h_sub = ad::concat_rows<T>(subs);
  Var<T> joint = out.h_sub;
  if (!config_.ablate.ssp) {
    out.h_sem = ad::concat_rows<T>(sems);
    const Var<T> parts[] = {out.h_sub, *out.h_sem};
    joint = ad::concat_cols<T>(parts);
    if (!config_.ablate.mi) out.mi = infonce(out.h_sub, *out.h_sem, static_cast<T>(config_.tau));
  }
  out.logits = linear(joint, *head_weight_, head_bias_);
  out.probs = predict(out.logits, config_.mode);
  return out;
}

template <typename T>
LossParts<T> DenoisedLP<T>::loss(const BatchOutput<T>& out, std::span<const std::vector<std::uint32_t>> labels) {
  if (labels.size() != out.probs.rows()) throw ShapeError("loss: one label per link");
  const auto y = label_matrix<T>(labels, config_.mode, config_.classes);
  LossParts<T> parts{task_loss(out.probs, y, config_.mode), out.mi, {}};
  parts.total = out.mi ? total_loss(parts.task, *out.mi, static_cast<T>(config_.lambda)) : parts.task;
  return parts;
}

template <typename T>
Tensor<T> DenoisedLP<T>::predict_probs(std::span<const LinkInput> batch) {
  Tape<T> tape;
  return forward(tape, batch, ForwardOptions<T>{}).probs.value();
}

template <typename T>
void DenoisedLP<T>::store(ad::Checkpoint& ck) const {
  store_config(config_, ck);
  for (const auto& p : store_) ck.put(p.name, p.value);
}

template <typename T>
DenoisedLP<T> DenoisedLP<T>::restore(const ad::Checkpoint& ck) {
  DenoisedLP model(load_config(ck), ck.get<T>("features.entity"), ck.get<T>("features.relation"), 0);
  for (auto& p : model.store_) {
    auto value = ck.get<T>(p.name);
    if (!value.same_shape(p.value)) throw ShapeError("checkpoint tensor " + p.name + " has the wrong shape");
    p.value = std::move(value);
  }
  return model;
}

template class DenoisedLP<float>;
template class DenoisedLP<double>;

}  // namespace dlp::model
