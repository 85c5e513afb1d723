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

#include "dlp/kgstore/knowledge_graph.hpp"

#include <algorithm>

#include "dlp/common/error.hpp"

namespace dlp::kg {

template <typename Id>
Id Vocabulary<Id>::at(std::string_view name) const {
  if (auto id = find(name)) return *id;
  throw LookupError("unknown name '" + std::string(name) + "'");
}

template class Vocabulary<EntityId>;
template class Vocabulary<RelationId>;
template class Vocabulary<TypeId>;

bool KnowledgeGraph::contains(const Triple& t) const {
  return std::binary_search(sorted_.begin(), sorted_.end(), t);
}

bool KnowledgeGraph::adjacent(EntityId a, EntityId b) const {
  auto n = neighbors(a);
  return std::binary_search(n.begin(), n.end(), b);
}

std::vector<EntityId> KnowledgeGraph::entities_of_type(TypeId type) const {
  std::vector<EntityId> out;
  for (std::size_t i = 0; i < entity_types_.size(); ++i) {
    if (entity_types_[i] == type) out.emplace_back(i);
  }
  return out;
}

bool operator==(const KnowledgeGraph& a, const KnowledgeGraph& b) {
  return a.entities_ == b.entities_ && a.relations_ == b.relations_ && a.types_ == b.types_ &&
         a.entity_types_ == b.entity_types_ && a.triples_ == b.triples_;
}

namespace {

// Counting-sort style CSR construction keyed by `key(triple)`.
template <typename KeyFn>
void build_csr(std::span<const Triple> triples, std::size_t buckets, KeyFn key,
               std::vector<std::uint32_t>& offsets, std::vector<std::uint32_t>& edges) {
  offsets.assign(buckets + 1, 0);
  for (const Triple& t : triples) ++offsets[key(t) + 1];
  for (std::size_t i = 0; i < buckets; ++i) offsets[i + 1] += offsets[i];
  edges.assign(triples.size(), 0);
  std::vector<std::uint32_t> cursor(offsets.begin(), offsets.end() - 1);
  for (std::uint32_t i = 0; i < triples.size(); ++i) edges[cursor[key(triples[i])]++] = i;
}

}  // namespace

void KnowledgeGraph::build_indexes() {
  const std::size_t n = entities_.size();
  build_csr(triples_, n, [](const Triple& t) { return t.head.index(); }, out_offsets_, out_edges_);
  build_csr(triples_, n, [](const Triple& t) { return t.tail.index(); }, in_offsets_, in_edges_);
  build_csr(triples_, relations_.size(), [](const Triple& t) { return t.relation.index(); },
            rel_offsets_, rel_edges_);

  sorted_ = triples_;
  std::sort(sorted_.begin(), sorted_.end());

  nbr_offsets_.assign(n + 1, 0);
  nbr_.clear();
  std::vector<EntityId> scratch;
  for (std::size_t e = 0; e < n; ++e) {
    scratch.clear();
    for (auto i : outgoing(EntityId(e))) scratch.push_back(triples_[i].tail);
    for (auto i : incoming(EntityId(e))) scratch.push_back(triples_[i].head);
    std::sort(scratch.begin(), scratch.end());
    scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
    scratch.erase(std::remove(scratch.begin(), scratch.end(), EntityId(e)), scratch.end());
    nbr_.insert(nbr_.end(), scratch.begin(), scratch.end());
    nbr_offsets_[e + 1] = static_cast<std::uint32_t>(nbr_.size());
  }
}

KnowledgeGraph::Builder::Builder() { graph_.types_.intern(""); }

KnowledgeGraph::Builder::Builder(const KnowledgeGraph& source, bool copy_relations) {
  graph_.entities_ = source.entities_;
  graph_.types_ = source.types_;
  graph_.entity_types_ = source.entity_types_;
  if (copy_relations) graph_.relations_ = source.relations_;
}

EntityId KnowledgeGraph::Builder::entity(std::string_view name, std::string_view type) {
  const EntityId id = graph_.entities_.intern(name);
  const TypeId tid = graph_.types_.intern(type);
  if (id.index() == graph_.entity_types_.size()) {
    graph_.entity_types_.push_back(tid);
    return id;
  }
  TypeId& current = graph_.entity_types_[id.index()];
  if (type.empty() || current == tid) return id;
  if (!graph_.types_.name(current).empty()) {
    throw ConflictError("entity '" + std::string(name) + "' typed both '" +
                        graph_.types_.name(current) + "' and '" + std::string(type) + "'");
  }
  current = tid;
  return id;
}

RelationId KnowledgeGraph::Builder::relation(std::string_view name) {
  return graph_.relations_.intern(name);
}

bool KnowledgeGraph::Builder::add(std::string_view head, std::string_view relation,
                                  std::string_view tail) {
  const EntityId h = entity(head);
  const RelationId r = this->relation(relation);
  const EntityId t = entity(tail);
  return add(Triple{h, r, t});
}

bool KnowledgeGraph::Builder::add(const Triple& t) {
  if (t.head.index() >= graph_.entities_.size() || t.tail.index() >= graph_.entities_.size() ||
      t.relation.index() >= graph_.relations_.size()) {
    throw LookupError("triple references an undeclared entity or relation");
  }
  if (!seen_.insert(t).second) return false;
  graph_.triples_.push_back(t);
  return true;
}

KnowledgeGraph KnowledgeGraph::Builder::build() && {
  graph_.build_indexes();
  seen_.clear();
  return std::move(graph_);
}

}  // namespace dlp::kg
