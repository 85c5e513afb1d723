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

#include "dlp/kgstore/tsv.hpp"

#include <fstream>

#include "dlp/common/error.hpp"

namespace dlp::kg {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\n')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.remove_suffix(1);
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

KnowledgeGraph parse_triples(std::istream& in, const ParseOptions& options) {
  KnowledgeGraph::Builder builder;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (trim(view).empty()) continue;
    auto fields = split_tabs(view);
    if (view.front() == '#') {
      if (fields[0] == "#type") {
        if (fields.size() < 2 || fields.size() > 3 || fields[1].empty()) {
          throw ParseError(lineno, "#type directive needs entity and optional type");
        }
        try {
          builder.entity(fields[1], fields.size() == 3 ? fields[2] : std::string_view{});
        } catch (const ConflictError& e) {
          throw ConflictError("line " + std::to_string(lineno) + ": " + e.what());
        }
      } else if (fields[0] == "#relation") {
        if (fields.size() != 2 || fields[1].empty()) {
          throw ParseError(lineno, "#relation directive needs a name");
        }
        builder.relation(fields[1]);
      }
      continue;
    }
    if (fields.size() != 3) {
      throw ParseError(lineno, "expected 3 tab-separated fields, got " + std::to_string(fields.size()));
    }
    if (fields[0].empty() || fields[1].empty() || fields[2].empty()) {
      throw ParseError(lineno, "empty field");
    }
    if (fields[0] == fields[2] && !options.reflexive_relations.contains(fields[1])) {
      throw ParseError(lineno, "self-loop on relation '" + std::string(fields[1]) +
                                   "' which is not declared reflexive");
    }
    builder.add(fields[0], fields[1], fields[2]);
  }
  return std::move(builder).build();
}

void write_triples(std::ostream& out, const KnowledgeGraph& graph) {
  for (std::size_t e = 0; e < graph.entity_count(); ++e) {
    const EntityId id(e);
    out << "#type\t" << graph.entities().name(id);
    if (const auto& t = graph.type_name(id); !t.empty()) out << '\t' << t;
    out << '\n';
  }
  for (const auto& r : graph.relations().names()) out << "#relation\t" << r << '\n';
  for (const Triple& t : graph.triples()) {
    out << graph.entities().name(t.head) << '\t' << graph.relations().name(t.relation) << '\t'
        << graph.entities().name(t.tail) << '\n';
  }
}

KnowledgeGraph apply_types(const KnowledgeGraph& graph, std::istream& types) {
  KnowledgeGraph::Builder builder(graph, true);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(types, line)) {
    ++lineno;
    std::string_view view = line;
    if (trim(view).empty() || view.front() == '#') continue;
    auto fields = split_tabs(view);
    if (fields.size() != 2 || fields[0].empty()) {
      throw ParseError(lineno, "expected entity<TAB>type");
    }
    try {
      builder.entity(fields[0], fields[1]);
    } catch (const ConflictError& e) {
      throw ConflictError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  for (const Triple& t : graph.triples()) builder.add(t);
  return std::move(builder).build();
}

void write_types(std::ostream& out, const KnowledgeGraph& graph) {
  for (std::size_t e = 0; e < graph.entity_count(); ++e) {
    const EntityId id(e);
    if (const auto& t = graph.type_name(id); !t.empty()) {
      out << graph.entities().name(id) << '\t' << t << '\n';
    }
  }
}

KnowledgeGraph load_graph(const std::string& triples_path, const std::string& types_path,
                          const ParseOptions& options) {
  std::ifstream in(triples_path);
  if (!in) throw Error("cannot open " + triples_path);
  KnowledgeGraph graph = parse_triples(in, options);
  if (types_path.empty()) return graph;
  std::ifstream types(types_path);
  if (!types) throw Error("cannot open " + types_path);
  return apply_types(graph, types);
}

}  // namespace dlp::kg
