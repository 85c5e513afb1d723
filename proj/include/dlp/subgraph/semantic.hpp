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
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "dlp/kgstore/knowledge_graph.hpp"

namespace dlp::sub {

/// One hop of a metapath. Inverse steps traverse a relation from tail to
/// head and are written `~name`.
struct MetapathStep {
  std::string relation;
  bool inverse = false;
  friend auto operator<=>(const MetapathStep&, const MetapathStep&) = default;
};

struct Metapath {
  std::string head_type;
  std::vector<MetapathStep> steps;
  std::string tail_type;

  std::string relation_string() const;
  friend auto operator<=>(const Metapath&, const Metapath&) = default;
};

inline constexpr std::size_t kDefaultMetapathLength = 3;

/// Every relation sequence of length 1..max_len realizable from head_type to
/// tail_type over the observed (type, relation, type) schemes, ordered by
/// length then lexicographically. Throws PreconditionError for max_len 0 and
/// LookupError for unknown types.
std::vector<Metapath> default_metapaths(const kg::KnowledgeGraph& graph, const std::string& head_type,
                                        const std::string& tail_type, std::size_t max_len = kDefaultMetapathLength,
                                        bool allow_inverse = true);

/// Lines `head_type<TAB>r1;r2;...<TAB>tail_type`; blank and `#` lines skipped.
std::vector<Metapath> parse_metapaths(std::istream& in);
std::vector<Metapath> load_metapaths(const std::string& path);
void write_metapaths(std::ostream& out, const std::vector<Metapath>& paths);

struct SemanticEdge {
  std::uint32_t head;  // local index
  RelationId relation;
  std::uint32_t tail;  // local index
  friend auto operator<=>(const SemanticEdge&, const SemanticEdge&) = default;
};

/// Union of all metapath instances from u to v. nodes[0] = u, nodes[1] = v
/// (one node when u == v), the rest sorted by entity id; edges keep their
/// KG direction and are sorted and distinct.
struct SemanticSubgraph {
  std::vector<EntityId> nodes;
  std::vector<TypeId> types;
  std::vector<SemanticEdge> edges;

  std::uint32_t u_index() const { return 0; }
  std::uint32_t v_index() const { return nodes.size() > 1 ? 1 : 0; }
  friend bool operator==(const SemanticSubgraph&, const SemanticSubgraph&) = default;
};

/// Only metapaths whose endpoint types equal type(u), type(v) are applied.
/// Relations named by a metapath must exist in the graph (LookupError).
/// With `drop_pair_edges`, edges joining u and v directly are ignored.
SemanticSubgraph extract_semantic(const kg::KnowledgeGraph& graph, EntityId u, EntityId v,
                                  const std::vector<Metapath>& metapaths, bool drop_pair_edges = true);

}  // namespace dlp::sub
