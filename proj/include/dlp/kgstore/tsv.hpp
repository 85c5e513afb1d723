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

#include <istream>
#include <ostream>
#include <set>
#include <string>

#include "dlp/kgstore/knowledge_graph.hpp"

namespace dlp::kg {

struct ParseOptions {
  /// Relations allowed to link an entity to itself; other self-loops are a
  /// parse error.
  std::set<std::string, std::less<>> reflexive_relations;
};

/// Reads `head<TAB>relation<TAB>tail` lines. Lines starting with `#` are
/// comments, except the directives
///   `#type<TAB>entity<TAB>type`   declare (and type) an entity
///   `#relation<TAB>name`          declare a relation
/// which fix vocabulary order and carry entity types inline.
/// Duplicate triples are dropped.
KnowledgeGraph parse_triples(std::istream& in, const ParseOptions& options = {});

/// Inverse of parse_triples: emits directives for every entity and relation
/// in id order, then one line per triple.
void write_triples(std::ostream& out, const KnowledgeGraph& graph);

/// Applies a types.tsv (`entity<TAB>type`) to an existing graph. Entities
/// not yet in the graph are added untied to any triple.
KnowledgeGraph apply_types(const KnowledgeGraph& graph, std::istream& types);

void write_types(std::ostream& out, const KnowledgeGraph& graph);

KnowledgeGraph load_graph(const std::string& triples_path, const std::string& types_path = {},
                          const ParseOptions& options = {});

/// Splits on tabs; trailing '\r' is removed.
std::vector<std::string_view> split_tabs(std::string_view line);
std::string_view trim(std::string_view s);

}  // namespace dlp::kg
