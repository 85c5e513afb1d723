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
#include <vector>

#include "dlp/diffcore/checkpoint.hpp"
#include "dlp/diffcore/tensor.hpp"
#include "dlp/kgstore/knowledge_graph.hpp"

namespace dlp::embed {

/// Complex entity embeddings and per-coordinate relation rotations.
///
/// `entity` is |E| x 2d with interleaved (real, imaginary) pairs; `phase` is
/// |R| x d angles in (-pi, pi], so every relation coordinate exp(i*phase)
/// has unit modulus by construction.
struct EmbeddingTable {
  ad::Tensor<double> entity;
  ad::Tensor<double> phase;

  std::size_t dim() const { return phase.cols(); }
  std::size_t entity_count() const { return entity.rows(); }
  std::size_t relation_count() const { return phase.rows(); }

  /// Relation r as an interleaved unit complex vector (cos, sin), 1 x 2d.
  ad::Tensor<double> relation_vector(RelationId r) const;

  void store(ad::Checkpoint& ck) const;
  static EmbeddingTable restore(const ad::Checkpoint& ck);

  friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;
};

/// ||x_h o e_r - x_t||: L2 norm of the complex rotation residual.
/// Throws LookupError for ids outside the table.
double rotate_score(const kg::Triple& triple, const EmbeddingTable& table);

/// Replaces head or tail (fair coin per sample) by a uniform entity so that
/// the result is absent from the graph. Falls back to
/// the other side when one side has no admissible replacement; throws
/// ExhaustedError when neither has.
std::vector<kg::Triple> negative_sample(const kg::Triple& triple, const kg::KnowledgeGraph& graph,
                                        std::size_t n, std::uint64_t seed);

struct PretrainConfig {
  std::size_t dim = 32;
  std::size_t epochs = 100;
  double lr = 0.01;
  double margin = 6.0;
  std::size_t negatives = 4;
  std::size_t batch_size = 256;
  std::uint64_t seed = 1;
  /// Entity coordinates start uniform in [-init_scale, init_scale].
  double init_scale = 1.0;
  /// Draw fresh negatives every epoch; when false they are drawn once.
  bool resample_negatives = true;
  /// Weight negatives by softmax(-temperature * score) instead of uniformly.
  bool self_adversarial = false;
  double adversarial_temperature = 1.0;
  /// Compute in 64-bit instead of 32-bit.
  bool double_precision = false;
};

struct PretrainResult {
  EmbeddingTable table;
  /// Mean margin loss per epoch.
  std::vector<double> loss_history;
};

EmbeddingTable initial_table(std::size_t entities, std::size_t relations, const PretrainConfig& config);

/// Margin ranking training max(0, margin + s(pos) - s(neg)), averaged over
/// negatives, with mini-batch Adam; phases are re-wrapped after each step.
/// Throws NumericError on a non-finite loss.
PretrainResult pretrain(const kg::KnowledgeGraph& graph, const PretrainConfig& config);

/// Maps an angle into (-pi, pi].
double wrap_phase(double theta);

}  // namespace dlp::embed
