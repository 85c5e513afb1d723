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

#include "dlp/kgstore/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_set>

#include "dlp/common/error.hpp"
#include "dlp/common/rng.hpp"

namespace dlp::kg {

std::vector<DatasetSplit> kfold_split(std::span<const LinkExample> examples, std::size_t k,
                                      std::uint64_t seed, bool stratify_by_class) {
  if (k < 2) throw PreconditionError("kfold_split needs k >= 2");
  if (examples.size() < k) throw PreconditionError("fewer examples than folds");
  Rng rng(seed);

  std::vector<std::vector<std::size_t>> partitions(k);
  if (stratify_by_class) {
    std::map<std::uint32_t, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < examples.size(); ++i) by_class[stratum_of(examples[i])].push_back(i);
    for (const auto& [cls, members] : by_class) {
      if (members.size() < k) {
        throw PreconditionError("class " + std::to_string(cls) + " has " +
                                std::to_string(members.size()) + " examples, fewer than k=" +
                                std::to_string(k));
      }
    }
    std::size_t cursor = 0;
    for (auto& [cls, members] : by_class) {
      rng.shuffle(std::span(members));
      for (auto idx : members) partitions[cursor++ % k].push_back(idx);
    }
  } else {
    std::vector<std::size_t> order(examples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(std::span(order));
    for (std::size_t i = 0; i < order.size(); ++i) partitions[i % k].push_back(order[i]);
  }
  for (auto& p : partitions) std::sort(p.begin(), p.end());

  std::vector<DatasetSplit> splits(k);
  for (std::size_t fold = 0; fold < k; ++fold) {
    DatasetSplit& s = splits[fold];
    s.fold = fold;
    const std::size_t valid_part = k >= 3 ? (fold + 1) % k : k;
    for (std::size_t p = 0; p < k; ++p) {
      auto& dst = p == fold ? s.test : (p == valid_part ? s.valid : s.train);
      for (auto idx : partitions[p]) dst.push_back(examples[idx]);
    }
  }
  return splits;
}

namespace {

std::uint64_t pair_key(EntityId h, EntityId t) { return (std::uint64_t{h.value} << 32) | t.value; }

}  // namespace

LinkSet sample_negatives(const LinkSet& positives, const KnowledgeGraph& graph, NegativeMode mode,
                         std::uint64_t seed) {
  if (positives.mode == TaskMode::multi_class) {
    throw PreconditionError("negative sampling has no negative class in multi-class tasks");
  }
  const std::vector<std::uint32_t> negative_label =
      positives.mode == TaskMode::binary ? std::vector<std::uint32_t>{0} : std::vector<std::uint32_t>{};

  std::unordered_set<std::uint64_t> known;
  std::set<TypeId> tail_types;
  std::vector<EntityId> heads;  // first-seen order
  std::map<EntityId, std::size_t> per_head;
  for (const auto& ex : positives.examples) {
    known.insert(pair_key(ex.head, ex.tail));
    tail_types.insert(graph.type_of(ex.tail));
    if (per_head[ex.head]++ == 0) heads.push_back(ex.head);
  }
  std::vector<EntityId> pool;
  for (std::size_t e = 0; e < graph.entity_count(); ++e) {
    if (tail_types.contains(graph.type_of(EntityId(e)))) pool.emplace_back(e);
  }

  auto candidates_for = [&](EntityId head) {
    std::vector<EntityId> c;
    for (auto t : pool) {
      if (t != head && !known.contains(pair_key(head, t))) c.push_back(t);
    }
    if (c.empty()) {
      throw ExhaustedError("no negative candidates for head '" + graph.entities().name(head) + "'");
    }
    return c;
  };

  Rng rng(seed);
  LinkSet out;
  out.mode = positives.mode;
  out.classes = positives.classes;
  if (mode == NegativeMode::balanced_per_head) {
    for (auto head : heads) {
      auto c = candidates_for(head);
      const std::size_t need = per_head[head];
      // Without replacement; restarts over the pool if a head needs more.
      for (std::size_t i = 0; i < need; ++i) {
        const std::size_t offset = i % c.size();
        const std::size_t j = offset + rng.below(c.size() - offset);
        std::swap(c[offset], c[j]);
        out.examples.push_back(LinkExample{head, c[offset], negative_label});
      }
    }
  } else {
    std::map<EntityId, std::vector<EntityId>> cache;
    for (const auto& ex : positives.examples) {
      auto it = cache.find(ex.head);
      if (it == cache.end()) it = cache.emplace(ex.head, candidates_for(ex.head)).first;
      const auto& c = it->second;
      out.examples.push_back(LinkExample{ex.head, c[rng.below(c.size())], negative_label});
    }
  }
  return out;
}

namespace {

std::size_t noise_count(const KnowledgeGraph& graph, double ratio) {
  if (!(ratio >= 0.0) || !std::isfinite(ratio)) throw PreconditionError("noise ratio must be >= 0");
  return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(graph.triple_count())));
}

// Draws `count` distinct absent triples by rejection from `draw`, or by
// enumerating the candidate space when it is small relative to `count`.
template <typename Draw, typename Enumerate>
KnowledgeGraph add_noise(const KnowledgeGraph& graph, std::size_t count, std::uint64_t space,
                         Rng& rng, Draw draw, Enumerate enumerate) {
  KnowledgeGraph::Builder builder(graph, true);
  for (const Triple& t : graph.triples()) builder.add(t);
  if (count == 0) return std::move(builder).build();

  if (space < 4 * (count + graph.triple_count()) + 1024) {
    std::vector<Triple> candidates;
    enumerate([&](const Triple& t) {
      if (t.head != t.tail && !graph.contains(t)) candidates.push_back(t);
    });
    if (candidates.size() < count) {
      throw ExhaustedError("noise candidate space exhausted: need " + std::to_string(count) +
                           ", have " + std::to_string(candidates.size()));
    }
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t j = i + rng.below(candidates.size() - i);
      std::swap(candidates[i], candidates[j]);
      builder.add(candidates[i]);
    }
    return std::move(builder).build();
  }
  std::size_t added = 0;
  while (added < count) {
    const Triple t = draw();
    if (t.head == t.tail || builder.contains(t)) continue;
    builder.add(t);
    ++added;
  }
  return std::move(builder).build();
}

}  // namespace

KnowledgeGraph inject_structural_noise(const KnowledgeGraph& graph, double ratio,
                                       std::uint64_t seed) {
  const std::size_t count = noise_count(graph, ratio);
  const std::uint64_t n = graph.entity_count();
  const std::uint64_t r = graph.relation_count();
  if (count > 0 && (n < 2 || r == 0)) throw ExhaustedError("noise candidate space exhausted");
  Rng rng(seed);
  auto draw = [&] {
    const EntityId h(static_cast<std::uint32_t>(rng.below(n)));
    const RelationId rel(static_cast<std::uint32_t>(rng.below(r)));
    const EntityId t(static_cast<std::uint32_t>(rng.below(n)));
    return Triple{h, rel, t};
  };
  auto enumerate = [&](auto&& emit) {
    for (std::uint32_t h = 0; h < n; ++h)
      for (std::uint32_t rel = 0; rel < r; ++rel)
        for (std::uint32_t t = 0; t < n; ++t) emit(Triple{EntityId(h), RelationId(rel), EntityId(t)});
  };
  return add_noise(graph, count, n * n * r, rng, draw, enumerate);
}

KnowledgeGraph inject_semantic_noise(const KnowledgeGraph& graph, double ratio,
                                     std::uint64_t seed) {
  const std::size_t count = noise_count(graph, ratio);
  struct Scheme {
    TypeId head_type;
    RelationId relation;
    TypeId tail_type;
    auto operator<=>(const Scheme&) const = default;
  };
  std::set<Scheme> scheme_set;
  for (const Triple& t : graph.triples()) {
    scheme_set.insert({graph.type_of(t.head), t.relation, graph.type_of(t.tail)});
  }
  std::vector<Scheme> schemes(scheme_set.begin(), scheme_set.end());
  std::map<TypeId, std::vector<EntityId>> members;
  for (const auto& s : schemes) {
    if (!members.contains(s.head_type)) members[s.head_type] = graph.entities_of_type(s.head_type);
    if (!members.contains(s.tail_type)) members[s.tail_type] = graph.entities_of_type(s.tail_type);
  }
  // Cumulative candidate weights so each conformant triple is equally likely.
  std::vector<std::uint64_t> cumulative;
  std::uint64_t space = 0;
  for (const auto& s : schemes) {
    space += members[s.head_type].size() * members[s.tail_type].size();
    cumulative.push_back(space);
  }
  if (count > 0 && space == 0) throw ExhaustedError("noise candidate space exhausted");
  Rng rng(seed);
  auto draw = [&] {
    const std::uint64_t x = rng.below(space);
    const auto s = static_cast<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), x) - cumulative.begin());
    const auto& heads = members[schemes[s].head_type];
    const auto& tails = members[schemes[s].tail_type];
    return Triple{heads[rng.below(heads.size())], schemes[s].relation, tails[rng.below(tails.size())]};
  };
  auto enumerate = [&](auto&& emit) {
    for (const auto& s : schemes)
      for (auto h : members[s.head_type])
        for (auto t : members[s.tail_type]) emit(Triple{h, s.relation, t});
  };
  return add_noise(graph, count, space, rng, draw, enumerate);
}

}  // namespace dlp::kg
