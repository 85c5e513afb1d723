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

#include <sstream>
#include <string>

#include "dlp/common/rng.hpp"
#include "dlp/kgstore/knowledge_graph.hpp"
#include "dlp/kgstore/tsv.hpp"

namespace dlp::testing {

inline kg::KnowledgeGraph graph_from(const std::string& text) {
  std::istringstream in(text);
  return kg::parse_triples(in);
}

/// Random typed graph with `n` entities of types drug/gene/disease and
/// `relations` relation names.
inline kg::KnowledgeGraph random_graph(std::uint64_t seed, std::size_t n, std::size_t triples,
                                       std::size_t relations = 3) {
  Rng rng(seed);
  kg::KnowledgeGraph::Builder b;
  const char* types[] = {"drug", "gene", "disease"};
  for (std::size_t i = 0; i < n; ++i) b.entity("e" + std::to_string(i), types[i % 3]);
  for (std::size_t r = 0; r < relations; ++r) b.relation("r" + std::to_string(r));
  std::size_t guard = 0;
  while (b.triple_count() < triples && guard++ < triples * 50) {
    const auto h = EntityId(static_cast<std::uint32_t>(rng.below(n)));
    const auto t = EntityId(static_cast<std::uint32_t>(rng.below(n)));
    if (h == t) continue;
    b.add(kg::Triple{h, RelationId(static_cast<std::uint32_t>(rng.below(relations))), t});
  }
  return std::move(b).build();
}

}  // namespace dlp::testing
