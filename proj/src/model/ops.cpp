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

#include "dlp/model/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "dlp/common/error.hpp"

namespace dlp::model {

EstimatorKind parse_estimator(std::string_view name) {
  if (name == "attention") return EstimatorKind::attention;
  if (name == "mlp") return EstimatorKind::mlp;
  if (name == "weighted_cosine") return EstimatorKind::weighted_cosine;
  if (name == "cosine") return EstimatorKind::cosine;
  throw ConfigError("unknown estimator kind '" + std::string(name) + "'");
}

std::string_view to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::attention: return "attention";
    case EstimatorKind::mlp: return "mlp";
    case EstimatorKind::weighted_cosine: return "weighted_cosine";
    case EstimatorKind::cosine: return "cosine";
  }
  return "?";
}

namespace {

std::vector<std::size_t> iota_index(std::size_t begin, std::size_t end) {
  std::vector<std::size_t> idx(end - begin);
  std::iota(idx.begin(), idx.end(), begin);
  return idx;
}

template <typename T>
Var<T> leaf(Var<T> like, Parameter<T>& p) {
  return like.tape->leaf(p);
}

}  // namespace

template <typename T>
Var<T> linear(Var<T> x, Parameter<T>& weight, Parameter<T>* bias) {
  if (x.cols() != weight.value.rows()) {
    throw ShapeError("linear " + weight.name + ": input width " + std::to_string(x.cols()) + " vs " +
                     weight.value.shape_string());
  }
  auto y = ad::matmul(x, leaf(x, weight));
  return bias ? ad::add(y, leaf(x, *bias)) : y;
}

template <typename T>
Var<T> project_nodes(Var<T> x, const ProjectionParams<T>& p) {
  return linear(activate(linear(x, *p.w0, p.b0), p.hidden), *p.w1, p.b1);
}

template <typename T>
Var<T> reliability(Var<T> z, Var<T> x, std::span<const sub::NodePair> pairs, const EstimatorParams<T>& p) {
  std::vector<std::size_t> left, right;
  left.reserve(pairs.size());
  right.reserve(pairs.size());
  for (const auto& [i, j] : pairs) left.push_back(i), right.push_back(j);
  switch (p.kind) {
    case EstimatorKind::attention: {
      const std::size_t h = z.cols();
      auto a = leaf(z, *p.attention);
      if (a.rows() != 2 * h) throw ShapeError("attention vector must have 2 * hidden rows");
      const auto first = iota_index(0, h), second = iota_index(h, 2 * h);
      auto s1 = ad::matmul(z, ad::gather_rows(a, std::span<const std::size_t>(first)));
      auto s2 = ad::matmul(z, ad::gather_rows(a, std::span<const std::size_t>(second)));
      return ad::sigmoid(ad::add(ad::gather_rows(s1, std::span<const std::size_t>(left)),
                                 ad::gather_rows(s2, std::span<const std::size_t>(right))));
    }
    case EstimatorKind::mlp: {
      auto zi = ad::gather_rows(z, std::span<const std::size_t>(left));
      auto zj = ad::gather_rows(z, std::span<const std::size_t>(right));
      return ad::sigmoid(ad::sum(ad::mul(zi, zj), ad::Axis::cols));
    }
    case EstimatorKind::weighted_cosine: {
      auto zw = ad::mul(z, leaf(z, *p.cosine_weight));
      auto c = ad::cosine(ad::gather_rows(zw, std::span<const std::size_t>(left)),
                          ad::gather_rows(zw, std::span<const std::size_t>(right)));
      return ad::affine(c, T(0.5), T(0.5));
    }
    case EstimatorKind::cosine: {
      auto c = ad::cosine(ad::gather_rows(x, std::span<const std::size_t>(left)),
                          ad::gather_rows(x, std::span<const std::size_t>(right)));
      return ad::affine(c, T(0.5), T(0.5));
    }
  }
  throw PreconditionError("reliability: bad estimator kind");
}

double concrete_relax(double pi, double eps, double temperature) {
  const double c = std::clamp(pi, kPiClamp, 1.0 - kPiClamp);
  const double z = (std::log(c / (1.0 - c)) + std::log(eps / (1.0 - eps))) / temperature;
  return 1.0 / (1.0 + std::exp(-z));
}

template <typename T>
Var<T> concrete_relax(Var<T> pi, const Tensor<T>& eps, T temperature) {
  if (!(temperature > T(0))) throw PreconditionError("concrete_relax: temperature must be > 0");
  if (!eps.same_shape(pi.value())) throw ShapeError("concrete_relax: noise shape mismatch");
  Tensor<T> noise = eps;
  for (auto& v : noise.values()) {
    if (!(v > T(0) && v < T(1))) throw DomainError("concrete_relax: noise outside (0, 1)");
    v = std::log(v) - std::log(T(1) - v);
  }
  auto c = ad::clamp(pi, static_cast<T>(kPiClamp), static_cast<T>(1.0 - kPiClamp));
  auto logit = ad::sub(ad::log(c), ad::log(ad::affine(c, T(-1), T(1))));
  auto z = ad::add(logit, pi.tape->constant(std::move(noise)));
  return ad::sigmoid(ad::affine(z, T(1) / temperature, T(0)));
}

template <typename T>
RefinedGraph<T> refine(std::size_t nodes, std::span<const sub::NodePair> pairs, Var<T> weights) {
  if (weights.rows() != pairs.size() || weights.cols() != 1) throw ShapeError("refine: one weight per pair");
  RefinedGraph<T> out;
  std::vector<ad::ElementRef> refs;
  const auto& w = weights.value();
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (!(w[k] >= T(0.5))) continue;
    const auto [i, j] = pairs[k];
    out.kept.push_back(pairs[k]);
    refs.push_back({i, j, k});
    refs.push_back({j, i, k});
  }
  Tensor<T> eye(nodes, nodes);
  for (std::size_t i = 0; i < nodes; ++i) eye(i, i) = T(1);
  auto a = ad::scatter_elements(weights, std::span<const ad::ElementRef>(refs), nodes, nodes);
  out.adjacency = ad::add(a, weights.tape->constant(std::move(eye)));
  return out;
}

template <typename T>
Var<T> observed_adjacency(Tape<T>& tape, std::size_t nodes, std::span<const sub::NodePair> edges) {
  Tensor<T> a(nodes, nodes);
  for (std::size_t i = 0; i < nodes; ++i) a(i, i) = T(1);
  for (const auto& [i, j] : edges) a(i, j) = a(j, i) = T(1);
  return tape.constant(std::move(a));
}

template <typename T>
Var<T> normalize_adjacency(Var<T> a) {
  for (T d : ad::sum(a, ad::Axis::cols).value().values()) {
    if (!(d > T(0))) throw DomainError("normalize_adjacency: non-positive degree");
  }
  auto dinv = ad::power(ad::sum(a, ad::Axis::cols), T(-0.5));
  return ad::mul(ad::mul(a, dinv), ad::transpose(dinv));
}

template <typename T>
Var<T> gcn_readout(Var<T> a_hat, Var<T> h0, std::span<Parameter<T>* const> layers, Parameter<T>& f_weight,
                   Parameter<T>& f_bias) {
  auto h = h0;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    h = ad::matmul(a_hat, linear(h, *layers[l]));
    if (l + 1 < layers.size()) h = ad::relu(h);
  }
  return ad::mean(ad::relu(linear(h, f_weight, &f_bias)), ad::Axis::rows);
}

template <typename T>
Var<T> rgnn_layer(Var<T> x, Var<T> e, std::span<const sub::SemanticEdge> edges, const RgnnLayerParams<T>& p) {
  const std::size_t n = x.rows();
  const std::size_t relations = p.relation.size();
  if (e.rows() != relations) throw ShapeError("rgnn_layer: relation embedding count mismatch");
  std::vector<std::vector<std::size_t>> heads(relations), tails(relations);
  for (const auto& edge : edges) {
    if (edge.relation.index() >= relations) {
      throw LookupError("rgnn_layer: unknown relation id " + std::to_string(edge.relation.value));
    }
    if (edge.head >= n || edge.tail >= n) throw LookupError("rgnn_layer: edge endpoint outside the node set");
    heads[edge.relation.index()].push_back(edge.head);
    tails[edge.relation.index()].push_back(edge.tail);
  }
  std::optional<Var<T>> out;
  auto accumulate = [&](Var<T> v) { out = out ? ad::add(*out, v) : v; };
  if (p.self) accumulate(linear(x, *p.self));
  for (std::size_t r = 0; r < relations; ++r) {
    if (heads[r].empty()) continue;
    const std::vector<std::size_t> rel(heads[r].size(), r);
    auto xi = ad::gather_rows(x, std::span<const std::size_t>(tails[r]));
    auto xj = ad::gather_rows(x, std::span<const std::size_t>(heads[r]));
    auto er = ad::gather_rows(e, std::span<const std::size_t>(rel));
    const Var<T> parts[] = {xi, xj, er};
    auto alpha = ad::sigmoid(linear(ad::concat_cols<T>(parts), *p.gate));
    auto msg = ad::mul(linear(ad::sub(xj, er), *p.relation[r]), alpha);
    accumulate(ad::scatter_add_rows(msg, std::span<const std::size_t>(tails[r]), n));
  }
  if (!out) return x.tape->constant(Tensor<T>(n, p.relation.at(0)->value.cols()));
  return *out;
}

template <typename T>
Var<T> rgnn_relations(Var<T> e, const RgnnLayerParams<T>& p) {
  return linear(e, *p.relation_update);
}

template <typename T>
Var<T> rgnn_readout(Var<T> x0, Var<T> e0, std::span<const sub::SemanticEdge> edges,
                    std::span<const RgnnLayerParams<T>> layers, Parameter<T>& f_weight, Parameter<T>& f_bias) {
  auto x = x0;
  auto e = e0;
  for (const auto& layer : layers) {
    auto next = rgnn_layer(x, e, edges, layer);
    e = rgnn_relations(e, layer);
    x = next;
  }
  return ad::mean(ad::relu(linear(x, f_weight, &f_bias)), ad::Axis::rows);
}

template <typename T>
Var<T> infonce(Var<T> h_sub, Var<T> h_sem, T tau) {
  if (!(tau > T(0))) throw PreconditionError("infonce: tau must be > 0");
  if (!h_sub.value().same_shape(h_sem.value()) || h_sub.rows() == 0) {
    throw ShapeError("infonce: batches must share a non-empty shape");
  }
  auto ns = ad::l2norm(h_sub, ad::Axis::cols), nm = ad::l2norm(h_sem, ad::Axis::cols);
  for (auto* norms : {&ns, &nm}) {
    for (T v : norms->value().values())
      if (!(v > T(0))) throw DomainError("infonce: zero-norm representation");
  }
  auto sim = ad::matmul(ad::div(h_sub, ns), ad::transpose(ad::div(h_sem, nm)));
  std::vector<std::size_t> targets(h_sub.rows());
  std::iota(targets.begin(), targets.end(), 0);
  return ad::softmax_cross_entropy(ad::affine(sim, T(1) / tau, T(0)), std::span<const std::size_t>(targets));
}

template <typename T>
Var<T> predict(Var<T> logits, kg::TaskMode mode) {
  if (mode != kg::TaskMode::multi_class) return ad::sigmoid(logits);
  Tensor<T> shift(logits.rows(), 1);
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto row = logits.value().row_span(i);
    shift[i] = *std::max_element(row.begin(), row.end());
  }
  auto ex = ad::exp(ad::sub(logits, logits.tape->constant(std::move(shift))));
  return ad::div(ex, ad::sum(ex, ad::Axis::cols));
}

template <typename T>
Tensor<T> label_matrix(std::span<const std::vector<std::uint32_t>> labels, kg::TaskMode mode, std::size_t classes) {
  Tensor<T> y(labels.size(), classes);
  for (std::size_t b = 0; b < labels.size(); ++b) {
    const auto& l = labels[b];
    switch (mode) {
      case kg::TaskMode::binary:
        if (classes != 1 || l.size() != 1 || l[0] > 1) throw PreconditionError("binary label must be {0} or {1}");
        y(b, 0) = static_cast<T>(l[0]);
        break;
      case kg::TaskMode::multi_class:
        if (l.size() != 1 || l[0] >= classes) throw PreconditionError("multi-class label out of range");
        y(b, l[0]) = T(1);
        break;
      case kg::TaskMode::multi_label:
        for (auto c : l) {
          if (c >= classes) throw PreconditionError("multi-label class out of range");
          y(b, c) = T(1);
        }
        break;
    }
  }
  return y;
}

template <typename T>
Var<T> task_loss(Var<T> p, const Tensor<T>& y, kg::TaskMode mode) {
  if (!y.same_shape(p.value())) {
    throw ShapeError("task_loss: probabilities " + p.value().shape_string() + " vs targets " + y.shape_string());
  }
  auto& tape = *p.tape;
  const T lo = static_cast<T>(kLogClamp);
  const T rows = static_cast<T>(p.rows());
  auto log_p = ad::log(ad::clamp(p, lo, T(1)));
  auto pos = ad::sum_all(ad::mul(log_p, tape.constant(y)));
  if (mode == kg::TaskMode::multi_class) return ad::affine(pos, T(-1) / rows, T(0));
  Tensor<T> ny = y;
  for (auto& v : ny.values()) v = T(1) - v;
  auto log_q = ad::log(ad::clamp(ad::affine(p, T(-1), T(1)), lo, T(1)));
  auto neg = ad::sum_all(ad::mul(log_q, tape.constant(std::move(ny))));
  return ad::affine(ad::add(pos, neg), T(-1) / rows, T(0));
}

#define DLP_MODEL_OPS(T)                                                                                    \
  template Var<T> linear(Var<T>, Parameter<T>&, Parameter<T>*);                                             \
  template Var<T> project_nodes(Var<T>, const ProjectionParams<T>&);                                        \
  template Var<T> reliability(Var<T>, Var<T>, std::span<const sub::NodePair>, const EstimatorParams<T>&);   \
  template Var<T> concrete_relax(Var<T>, const Tensor<T>&, T);                                              \
  template RefinedGraph<T> refine(std::size_t, std::span<const sub::NodePair>, Var<T>);                     \
  template Var<T> observed_adjacency(Tape<T>&, std::size_t, std::span<const sub::NodePair>);                \
  template Var<T> normalize_adjacency(Var<T>);                                                              \
  template Var<T> gcn_readout(Var<T>, Var<T>, std::span<Parameter<T>* const>, Parameter<T>&, Parameter<T>&); \
  template Var<T> rgnn_layer(Var<T>, Var<T>, std::span<const sub::SemanticEdge>, const RgnnLayerParams<T>&); \
  template Var<T> rgnn_relations(Var<T>, const RgnnLayerParams<T>&);                                        \
  template Var<T> rgnn_readout(Var<T>, Var<T>, std::span<const sub::SemanticEdge>,                          \
                               std::span<const RgnnLayerParams<T>>, Parameter<T>&, Parameter<T>&);          \
  template Var<T> infonce(Var<T>, Var<T>, T);                                                               \
  template Var<T> predict(Var<T>, kg::TaskMode);                                                            \
  template Tensor<T> label_matrix(std::span<const std::vector<std::uint32_t>>, kg::TaskMode, std::size_t);   \
  template Var<T> task_loss(Var<T>, const Tensor<T>&, kg::TaskMode);

DLP_MODEL_OPS(float)
DLP_MODEL_OPS(double)

}  // namespace dlp::model
