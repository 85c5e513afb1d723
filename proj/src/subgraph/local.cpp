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

#include "dlp/subgraph/local.hpp"

#include <algorithm>
#include <deque>

#include "dlp/common/error.hpp"
#include "dlp/common/rng.hpp"

namespace dlp::sub {

namespace {

void check_entity(const kg::KnowledgeGraph& graph, EntityId e) {
  if (e.index() >= graph.entity_count()) throw LookupError("unknown entity id " + std::to_string(e.value));
}

bool is_blocked(const std::pair<EntityId, EntityId>* blocked, EntityId a, EntityId b) {
  return blocked && ((a == blocked->first && b == blocked->second) || (a == blocked->second && b == blocked->first));
}

}  // namespace

std::vector<std::uint32_t> hop_distances(const kg::KnowledgeGraph& graph, EntityId source, std::uint32_t k,
                                         const std::pair<EntityId, EntityId>* blocked) {
  check_entity(graph, source);
  std::vector<std::uint32_t> dist(graph.entity_count(), kUnreached);
  std::deque<EntityId> queue{source};
  dist[source.index()] = 0;
  while (!queue.empty()) {
    const EntityId x = queue.front();
    queue.pop_front();
    const std::uint32_t dx = dist[x.index()];
    if (dx == k) continue;
    for (EntityId y : graph.neighbors(x)) {
      if (dist[y.index()] != kUnreached || is_blocked(blocked, x, y)) continue;
      dist[y.index()] = dx + 1;
      queue.push_back(y);
    }
  }
  return dist;
}

std::vector<EntityId> khop_neighbors(const kg::KnowledgeGraph& graph, EntityId node, std::uint32_t k) {
  const auto dist = hop_distances(graph, node, k);
  std::vector<EntityId> out;
  for (std::size_t i = 0; i < dist.size(); ++i)
    if (dist[i] != kUnreached) out.emplace_back(static_cast<std::uint32_t>(i));
  return out;
}

LocalSubgraph extract_local(const kg::KnowledgeGraph& graph, EntityId u, EntityId v, const LocalConfig& config,
                            std::uint64_t seed) {
  check_entity(graph, u);
  check_entity(graph, v);
  if (config.max_nodes < 2) throw PreconditionError("extract_local: max_nodes must be >= 2");
  const std::pair<EntityId, EntityId> pair{u, v};
  const auto* blocked = config.drop_pair_edges ? &pair : nullptr;
  const auto du = hop_distances(graph, u, config.hops, blocked);
  const auto dv = hop_distances(graph, v, config.hops, blocked);

  struct Candidate {
    std::uint32_t distance;
    std::uint64_t tie;
    EntityId id;
  };
  Rng rng(Rng::mix(seed) ^ Rng::mix((std::uint64_t{u.value} << 32) | v.value));
  std::vector<Candidate> inner;
  for (std::size_t i = 0; i < du.size(); ++i) {
    const EntityId e(static_cast<std::uint32_t>(i));
    if (e == u || e == v || du[i] == kUnreached || dv[i] == kUnreached) continue;
    inner.push_back({du[i] + dv[i], rng.next(), e});
  }
  const std::size_t room = config.max_nodes - (u == v ? 1 : 2);
  if (inner.size() > room) {
    std::sort(inner.begin(), inner.end(), [](const Candidate& a, const Candidate& b) {
      return a.distance != b.distance ? a.distance < b.distance : a.tie < b.tie;
    });
    inner.resize(room);
  }
  std::sort(inner.begin(), inner.end(), [](const Candidate& a, const Candidate& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
  });

  LocalSubgraph out;
  out.nodes.push_back(u);
  if (v != u) out.nodes.push_back(v);
  for (const auto& c : inner) out.nodes.push_back(c.id);

  std::vector<std::uint32_t> local(graph.entity_count(), kUnreached);
  for (std::uint32_t i = 0; i < out.nodes.size(); ++i) local[out.nodes[i].index()] = i;
  for (std::uint32_t i = 0; i < out.nodes.size(); ++i) {
    for (EntityId y : graph.neighbors(out.nodes[i])) {
      const std::uint32_t j = local[y.index()];
      if (j == kUnreached || j <= i || is_blocked(blocked, out.nodes[i], y)) continue;
      out.observed_edges.emplace_back(i, j);
    }
  }
  std::sort(out.observed_edges.begin(), out.observed_edges.end());
  const auto n = static_cast<std::uint32_t>(out.nodes.size());
  out.candidate_pairs.reserve(n * (n - 1) / 2);
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = i + 1; j < n; ++j) out.candidate_pairs.emplace_back(i, j);
  return out;
}

}  // namespace dlp::sub
