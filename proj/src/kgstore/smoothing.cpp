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

#include "dlp/kgstore/smoothing.hpp"

#include <fstream>
#include <optional>

#include "dlp/common/error.hpp"
#include "dlp/kgstore/tsv.hpp"

namespace dlp::kg {

SmoothingMap parse_smoothing(std::istream& in, UnmappedPolicy unmapped) {
  SmoothingMap map;
  map.unmapped = unmapped;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (trim(view).empty() || view.front() == '#') continue;
    auto fields = split_tabs(view);
    if (fields.size() != 2 || fields[0].empty()) throw ParseError(lineno, "expected relation<TAB>class");
    std::optional<SmoothedClass> cls;
    for (std::size_t i = 0; i < kSmoothedClassNames.size(); ++i) {
      if (trim(fields[1]) == kSmoothedClassNames[i]) cls = static_cast<SmoothedClass>(i);
    }
    if (!cls) throw ParseError(lineno, "unknown smoothed class '" + std::string(fields[1]) + "'");
    auto [it, inserted] = map.classes.emplace(std::string(fields[0]), *cls);
    if (!inserted && it->second != *cls) {
      throw ConflictError("line " + std::to_string(lineno) + ": relation '" + std::string(fields[0]) +
                          "' mapped twice");
    }
  }
  return map;
}

SmoothingMap load_smoothing(const std::string& path, UnmappedPolicy unmapped) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return parse_smoothing(in, unmapped);
}

KnowledgeGraph smooth_relations(const KnowledgeGraph& graph, const SmoothingMap& map) {
  KnowledgeGraph::Builder builder(graph, false);
  for (auto name : kSmoothedClassNames) builder.relation(name);

  // Target relation per source relation; nullopt means drop.
  std::vector<std::optional<RelationId>> target(graph.relation_count());
  for (std::size_t r = 0; r < graph.relation_count(); ++r) {
    const auto& name = graph.relations().name(RelationId(r));
    if (auto it = map.classes.find(name); it != map.classes.end()) {
      target[r] = RelationId(static_cast<std::uint32_t>(it->second));
      continue;
    }
    switch (map.unmapped) {
      case UnmappedPolicy::strict:
        throw PreconditionError("relation '" + name + "' has no smoothing class");
      case UnmappedPolicy::drop:
        break;
      case UnmappedPolicy::keep:
        target[r] = builder.relation(name);
        break;
    }
  }
  for (const Triple& t : graph.triples()) {
    if (auto r = target[t.relation.index()]) builder.add(Triple{t.head, *r, t.tail});
  }
  return std::move(builder).build();
}

}  // namespace dlp::kg
