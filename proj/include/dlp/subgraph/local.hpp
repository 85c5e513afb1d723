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
#include <utility>
#include <vector>

#include "dlp/kgstore/knowledge_graph.hpp"

namespace dlp::sub {

/// Local indices into LocalSubgraph::nodes, first < second.
using NodePair = std::pair<std::uint32_t, std::uint32_t>;

/// Enclosing subgraph of a query link. nodes[0] is u and nodes[1] is v
/// (a single node when u == v); the rest are ordered by ascending
/// d(u,.) + d(v,.), then entity id.
struct LocalSubgraph {
  std::vector<EntityId> nodes;
  std::vector<NodePair> observed_edges;
  std::vector<NodePair> candidate_pairs;

  std::uint32_t u_index() const { return 0; }
  std::uint32_t v_index() const { return nodes.size() > 1 ? 1 : 0; }
  friend bool operator==(const LocalSubgraph&, const LocalSubgraph&) = default;
};

struct LocalConfig {
  std::uint32_t hops = 2;
  std::size_t max_nodes = 64;
  /// Ignore every u-v edge during distance computation and edge collection.
  bool drop_pair_edges = true;
};

/// Entities within k undirected hops of `node`, including itself, sorted.
/// Throws LookupError for an unknown node.
std::vector<EntityId> khop_neighbors(const kg::KnowledgeGraph& graph, EntityId node, std::uint32_t k);

inline constexpr std::uint32_t kUnreached = ~std::uint32_t{0};

/// Hop distances from `source` up to `k` (kUnreached beyond). When
/// `blocked` is set, the edge between its two entities is not traversed.
std::vector<std::uint32_t> hop_distances(const kg::KnowledgeGraph& graph, EntityId source, std::uint32_t k,
                                         const std::pair<EntityId, EntityId>* blocked = nullptr);

/// V = (N_k(u) & N_k(v)) | {u, v}, down-sampled to `max_nodes` with seeded
/// tie-breaking; edges are every KG edge inside V, and candidate pairs are
/// all unordered pairs over V.
LocalSubgraph extract_local(const kg::KnowledgeGraph& graph, EntityId u, EntityId v, const LocalConfig& config,
                            std::uint64_t seed);

}  // namespace dlp::sub
