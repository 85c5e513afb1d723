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

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dlp/common/rng.hpp"
#include "dlp/diffcore/checkpoint.hpp"
#include "dlp/model/ops.hpp"

namespace dlp::model {

struct Ablation {
  bool srl = false;  // use the observed local graph instead of the refined one
  bool ssp = false;  // drop the semantic branch; classify on h_sub alone
  bool mi = false;   // omit the InfoNCE term
  friend bool operator==(const Ablation&, const Ablation&) = default;
};

struct ModelConfig {
  EstimatorKind estimator = EstimatorKind::attention;
  Activation projection_activation = Activation::relu;
  std::size_t hidden = 64;
  std::size_t gcn_layers = 2;
  std::size_t rgnn_layers = 2;
  bool self_term = true;
  double temperature = 1.0;
  double tau = 0.5;
  double lambda = 0.1;
  Ablation ablate;
  kg::TaskMode mode = kg::TaskMode::binary;
  std::size_t classes = 1;
  /// Train the pretrained entity / relation features too.
  bool fine_tune = false;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// The two subgraphs of one queried link.
struct LinkInput {
  const sub::LocalSubgraph* local = nullptr;
  const sub::SemanticSubgraph* semantic = nullptr;
};

template <typename T>
struct ForwardOptions {
  /// Training draws Concrete noise; evaluation uses the weight pi directly.
  bool train = false;
  Rng* rng = nullptr;
  /// Fixed noise per link (one value per candidate pair), overriding rng.
  std::span<const Tensor<T>> epsilon{};
};

template <typename T>
struct BatchOutput {
  Var<T> logits;
  Var<T> probs;
  Var<T> h_sub;
  std::optional<Var<T>> h_sem;
  std::optional<Var<T>> mi;
  /// Per link: reliability values and edge weights over candidate pairs.
  std::vector<Tensor<T>> pi;
  std::vector<Tensor<T>> weights;
  std::vector<std::size_t> kept_edges;
};

template <typename T>
struct LossParts {
  Var<T> task;
  std::optional<Var<T>> mi;
  Var<T> total;
};

template <typename T>
class DenoisedLP {
 public:
  /// entity_features: |E| x F rows of X; relation_features: |R| x F rows of E
  /// for the smoothed relation vocabulary.
  DenoisedLP(ModelConfig config, Tensor<T> entity_features, Tensor<T> relation_features, std::uint64_t seed);

  DenoisedLP(const DenoisedLP&) = delete;
  DenoisedLP& operator=(const DenoisedLP&) = delete;
  DenoisedLP(DenoisedLP&&) = default;

  const ModelConfig& config() const { return config_; }
  std::size_t feature_dim() const { return entity_->value.cols(); }
  std::size_t relation_count() const { return relation_->value.rows(); }

  /// Parameters that receive updates (features only when fine-tuning).
  std::vector<Parameter<T>*> trainable();
  /// Every parameter, features included, in creation order.
  std::vector<Parameter<T>*> all_parameters();
  Parameter<T>& parameter(const std::string& name);
  bool has_parameter(const std::string& name) const { return by_name_.contains(name); }

  BatchOutput<T> forward(Tape<T>& tape, std::span<const LinkInput> batch, const ForwardOptions<T>& options);
  LossParts<T> loss(const BatchOutput<T>& out, std::span<const std::vector<std::uint32_t>> labels);

  /// Evaluation-mode probabilities, B x C.
  Tensor<T> predict_probs(std::span<const LinkInput> batch);

  void store(ad::Checkpoint& ck) const;
  static DenoisedLP restore(const ad::Checkpoint& ck);

 private:
  Parameter<T>& add(const std::string& name, std::size_t rows, std::size_t cols, Rng& rng, double fill = -1.0);
  Var<T> features(Tape<T>& tape, Parameter<T>& table, std::span<const EntityId> ids);
  Var<T> encode_local(Tape<T>& tape, const sub::LocalSubgraph& local, const ForwardOptions<T>& options,
                      std::size_t link, BatchOutput<T>& out);
  Var<T> encode_semantic(Tape<T>& tape, const sub::SemanticSubgraph& semantic);

  ModelConfig config_;
  std::deque<Parameter<T>> store_;
  std::map<std::string, Parameter<T>*> by_name_;
  Parameter<T>* entity_ = nullptr;
  Parameter<T>* relation_ = nullptr;
  ProjectionParams<T> projection_;
  EstimatorParams<T> estimator_;
  std::vector<Parameter<T>*> gcn_;
  Parameter<T>* sub_weight_ = nullptr;
  Parameter<T>* sub_bias_ = nullptr;
  std::vector<RgnnLayerParams<T>> rgnn_;
  Parameter<T>* sem_weight_ = nullptr;
  Parameter<T>* sem_bias_ = nullptr;
  Parameter<T>* head_weight_ = nullptr;
  Parameter<T>* head_bias_ = nullptr;
};

/// Writes the configuration as checkpoint metadata and reads it back.
void store_config(const ModelConfig& config, ad::Checkpoint& ck);
ModelConfig load_config(const ad::Checkpoint& ck);

}  // namespace dlp::model
