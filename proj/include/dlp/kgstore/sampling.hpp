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
#include <span>
#include <vector>

#include "dlp/kgstore/knowledge_graph.hpp"
#include "dlp/kgstore/links.hpp"

namespace dlp::kg {

struct DatasetSplit {
  std::size_t fold = 0;
  std::vector<LinkExample> train;
  std::vector<LinkExample> valid;
  std::vector<LinkExample> test;
};

/// k-fold cross-validation. Fold i tests on partition i and validates on
/// partition (i+1) mod k; the remaining partitions train. With k == 2 the
/// validation set is empty. With stratification, examples are dealt
/// round-robin per class so every partition holds every class.
std::vector<DatasetSplit> kfold_split(std::span<const LinkExample> examples, std::size_t k,
                                      std::uint64_t seed, bool stratify_by_class);

enum class NegativeMode { balanced_per_head, counterpart_per_positive };

/// Corrupts the tail of positives. Candidate tails are the graph's entities
/// sharing a type with some positive tail; pairs in the positive set and the
/// head itself are excluded. Negatives carry the task's "negative" label:
/// {0} for binary and {} for multi-label. Multi-class sets are rejected.
LinkSet sample_negatives(const LinkSet& positives, const KnowledgeGraph& graph, NegativeMode mode,
                         std::uint64_t seed);

/// Adds floor(ratio * |triples|) uniformly drawn absent triples (h != t)
/// over all entity-relation-entity combinations.
KnowledgeGraph inject_structural_noise(const KnowledgeGraph& graph, double ratio,
                                       std::uint64_t seed);

/// As inject_structural_noise, restricted to (head type, relation, tail type)
/// schemes observed in the graph.
KnowledgeGraph inject_semantic_noise(const KnowledgeGraph& graph, double ratio,
                                     std::uint64_t seed);

}  // namespace dlp::kg
