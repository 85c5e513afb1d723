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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dlp/common/ids.hpp"

namespace dlp::kg {

struct Triple {
  EntityId head;
  RelationId relation;
  EntityId tail;

  friend auto operator<=>(const Triple&, const Triple&) = default;
};

/// Name <-> dense id table; ids are assigned in first-seen order.
template <typename Id>
class Vocabulary {
 public:
  Id intern(std::string_view name) {
    auto it = index_.find(std::string(name));
    if (it != index_.end()) return it->second;
    const Id id(static_cast<std::uint32_t>(names_.size()));
    names_.emplace_back(name);
    index_.emplace(names_.back(), id);
    return id;
  }

  std::optional<Id> find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// Throws LookupError when the name is unknown.
  Id at(std::string_view name) const;

  const std::string& name(Id id) const { return names_.at(id.index()); }
  std::size_t size() const { return names_.size(); }
  std::span<const std::string> names() const { return names_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.names_ == b.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, Id> index_;
};

/// Edge list of one node; stores positions into KnowledgeGraph::triples().
using EdgeList = std::span<const std::uint32_t>;

/// Immutable knowledge graph with adjacency and per-relation indexes.
///
/// Built through KnowledgeGraph::Builder; every mutating operation in the
/// library returns a new graph.
class KnowledgeGraph {
 public:
  class Builder;

  KnowledgeGraph() = default;

  std::size_t entity_count() const { return entities_.size(); }
  std::size_t relation_count() const { return relations_.size(); }
  std::size_t triple_count() const { return triples_.size(); }

  const Vocabulary<EntityId>& entities() const { return entities_; }
  const Vocabulary<RelationId>& relations() const { return relations_; }
  const Vocabulary<TypeId>& types() const { return types_; }

  std::span<const Triple> triples() const { return triples_; }

  /// Entity type; entities declared without a type share the empty-name type.
  TypeId type_of(EntityId e) const { return entity_types_.at(e.index()); }
  const std::string& type_name(EntityId e) const { return types_.name(type_of(e)); }

  EdgeList outgoing(EntityId e) const { return slice(out_offsets_, out_edges_, e.index()); }
  EdgeList incoming(EntityId e) const { return slice(in_offsets_, in_edges_, e.index()); }
  EdgeList by_relation(RelationId r) const { return slice(rel_offsets_, rel_edges_, r.index()); }

  /// Distinct neighbours ignoring relation and direction, sorted by id.
  std::span<const EntityId> neighbors(EntityId e) const {
    const auto b = nbr_offsets_.at(e.index());
    const auto n = nbr_offsets_.at(e.index() + 1) - b;
    return std::span<const EntityId>(nbr_).subspan(b, n);
  }

  bool contains(const Triple& t) const;
  /// True when some triple links a and b in either direction.
  bool adjacent(EntityId a, EntityId b) const;

  /// Entities carrying the given type, in id order.
  std::vector<EntityId> entities_of_type(TypeId type) const;

  friend bool operator==(const KnowledgeGraph& a, const KnowledgeGraph& b);

 private:
  static EdgeList slice(const std::vector<std::uint32_t>& offsets,
                        const std::vector<std::uint32_t>& edges, std::size_t i) {
    const auto b = offsets.at(i);
    return EdgeList(edges).subspan(b, offsets.at(i + 1) - b);
  }

  void build_indexes();

  Vocabulary<EntityId> entities_;
  Vocabulary<RelationId> relations_;
  Vocabulary<TypeId> types_;
  std::vector<TypeId> entity_types_;
  std::vector<Triple> triples_;
  std::vector<Triple> sorted_;

  std::vector<std::uint32_t> out_offsets_, out_edges_;
  std::vector<std::uint32_t> in_offsets_, in_edges_;
  std::vector<std::uint32_t> rel_offsets_, rel_edges_;
  std::vector<std::uint32_t> nbr_offsets_;
  std::vector<EntityId> nbr_;
};

struct TripleHash {
  std::size_t operator()(const Triple& t) const noexcept {
    std::uint64_t x = (std::uint64_t{t.head.value} << 32) ^ t.tail.value;
    x ^= std::uint64_t{t.relation.value} * 0x9e3779b97f4a7c15ULL;
    x ^= x >> 29;
    return static_cast<std::size_t>(x * 0xbf58476d1ce4e5b9ULL);
  }
};

class KnowledgeGraph::Builder {
 public:
  Builder();
  /// Starts from the entity and type vocabularies of `source` (and its
  /// relation vocabulary when `copy_relations`), with no triples.
  Builder(const KnowledgeGraph& source, bool copy_relations);

  /// Declares an entity, optionally typed. Re-typing with a different
  /// non-empty type raises ConflictError.
  EntityId entity(std::string_view name, std::string_view type = {});
  RelationId relation(std::string_view name);

  /// Adds a triple; returns false if it was already present.
  bool add(std::string_view head, std::string_view relation, std::string_view tail);
  bool add(const Triple& t);
  bool contains(const Triple& t) const { return seen_.contains(t); }

  std::size_t triple_count() const { return graph_.triples_.size(); }
  const KnowledgeGraph& partial() const { return graph_; }

  KnowledgeGraph build() &&;

 private:
  KnowledgeGraph graph_;
  std::unordered_set<Triple, TripleHash> seen_;
};

}  // namespace dlp::kg
