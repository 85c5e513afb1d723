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

#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dlp/diffcore/ops.hpp"
#include "dlp/diffcore/tape.hpp"
#include "dlp/kgstore/links.hpp"
#include "dlp/subgraph/local.hpp"
#include "dlp/subgraph/semantic.hpp"

namespace dlp::model {

using ad::Parameter;
using ad::Tape;
using ad::Tensor;
using ad::Var;

enum class EstimatorKind { attention, mlp, weighted_cosine, cosine };
EstimatorKind parse_estimator(std::string_view name);
std::string_view to_string(EstimatorKind kind);

enum class Activation { relu, identity };

template <typename T>
Var<T> activate(Var<T> x, Activation act) {
  return act == Activation::relu ? ad::relu(x) : x;
}

/// x W (+ b). weight is in x out, bias 1 x out.
template <typename T>
Var<T> linear(Var<T> x, Parameter<T>& weight, Parameter<T>* bias = nullptr);

/// Z = second(act(first(X))).
template <typename T>
struct ProjectionParams {
  Parameter<T>* w0 = nullptr;
  Parameter<T>* b0 = nullptr;
  Parameter<T>* w1 = nullptr;
  Parameter<T>* b1 = nullptr;
  Activation hidden = Activation::relu;
};
template <typename T>
Var<T> project_nodes(Var<T> x, const ProjectionParams<T>& p);

/// attention: 2h x 1 vector a; weighted_cosine: 1 x h weights w.
template <typename T>
struct EstimatorParams {
  EstimatorKind kind = EstimatorKind::attention;
  Parameter<T>* attention = nullptr;
  Parameter<T>* cosine_weight = nullptr;
};

/// pi over `pairs` as a |pairs| x 1 column. `x` holds the raw features (used
/// by the cosine kind), `z` the projected rows.
template <typename T>
Var<T> reliability(Var<T> z, Var<T> x, std::span<const sub::NodePair> pairs, const EstimatorParams<T>& p);

inline constexpr double kPiClamp = 1e-6;
inline constexpr double kLogClamp = 1e-12;

/// Narrows u in (0, 1) to T, staying strictly below 1.
template <typename T>
T open_unit(double u) {
  const T v = static_cast<T>(u);
  return v < T(1) ? v : std::nextafter(T(1), T(0));
}

/// sigmoid((logit(clamp(pi)) + logit(eps)) / t), elementwise; eps has pi's shape.
template <typename T>
Var<T> concrete_relax(Var<T> pi, const Tensor<T>& eps, T temperature);
double concrete_relax(double pi, double eps, double temperature);

/// Kept pairs of a refined graph and its dense weighted adjacency
/// including unit self-loops.
template <typename T>
struct RefinedGraph {
  Var<T> adjacency;
  std::vector<sub::NodePair> kept;
};

/// Keeps pairs whose weight is >= 0.5, symmetrically, and adds self-loops.
template <typename T>
RefinedGraph<T> refine(std::size_t nodes, std::span<const sub::NodePair> pairs, Var<T> weights);

/// Unit-weight adjacency of the observed edges plus self-loops.
template <typename T>
Var<T> observed_adjacency(Tape<T>& tape, std::size_t nodes, std::span<const sub::NodePair> edges);

/// D^-1/2 A D^-1/2 with D the row sums of A.
template <typename T>
Var<T> normalize_adjacency(Var<T> a);

/// h^l = A_hat h^(l-1) W_l, rectified between layers; then mean(relu(f(h^L))).
template <typename T>
Var<T> gcn_readout(Var<T> a_hat, Var<T> h0, std::span<Parameter<T>* const> layers, Parameter<T>& f_weight,
                   Parameter<T>& f_bias);

template <typename T>
struct RgnnLayerParams {
  std::vector<Parameter<T>*> relation;  // W_r, one per relation
  Parameter<T>* gate = nullptr;         // W_1, 3*in x 1
  Parameter<T>* self = nullptr;         // W_0 or null
  Parameter<T>* relation_update = nullptr;
};

/// x_i' = sum over in-edges (j, r, i) of sigmoid(W_1[x_i, x_j, e_r]) W_r (x_j - e_r), plus W_0 x_i.
template <typename T>
Var<T> rgnn_layer(Var<T> x, Var<T> e, std::span<const sub::SemanticEdge> edges, const RgnnLayerParams<T>& p);

/// e' = e W_rel.
template <typename T>
Var<T> rgnn_relations(Var<T> e, const RgnnLayerParams<T>& p);

template <typename T>
Var<T> rgnn_readout(Var<T> x0, Var<T> e0, std::span<const sub::SemanticEdge> edges,
                    std::span<const RgnnLayerParams<T>> layers, Parameter<T>& f_weight, Parameter<T>& f_bias);

/// Mean over anchors of -log softmax_m(cos(h_sub_i, h_sem_m) / tau)[i].
template <typename T>
Var<T> infonce(Var<T> h_sub, Var<T> h_sem, T tau);

/// Class probabilities from head logits: sigmoid for binary and multi-label,
/// softmax for multi-class.
template <typename T>
Var<T> predict(Var<T> logits, kg::TaskMode mode);

/// Dense targets for a batch of labels, B x C.
template <typename T>
Tensor<T> label_matrix(std::span<const std::vector<std::uint32_t>> labels, kg::TaskMode mode, std::size_t classes);

/// Batch mean of the cross-entropy of probabilities `p` against targets `y`
/// (B x C): categorical for multi-class, Bernoulli summed over classes
/// otherwise. Probabilities are clamped at 1e-12 before the log.
template <typename T>
Var<T> task_loss(Var<T> p, const Tensor<T>& y, kg::TaskMode mode);

template <typename T>
Var<T> total_loss(Var<T> task, Var<T> mi, T lambda) {
  return ad::add(task, ad::affine(mi, lambda, T(0)));
}

}  // namespace dlp::model
