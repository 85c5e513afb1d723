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

#include "dlp/subgraph/semantic.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <tuple>
#include <unordered_map>

#include "dlp/common/error.hpp"
#include "dlp/kgstore/tsv.hpp"

namespace dlp::sub {

std::string Metapath::relation_string() const {
  std::string s;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (i) s += ';';
    if (steps[i].inverse) s += '~';
    s += steps[i].relation;
  }
  return s;
}

std::vector<Metapath> default_metapaths(const kg::KnowledgeGraph& graph, const std::string& head_type,
                                        const std::string& tail_type, std::size_t max_len, bool allow_inverse) {
  if (max_len == 0) throw PreconditionError("default_metapaths: max_len must be >= 1");
  const auto head = graph.types().find(head_type);
  const auto tail = graph.types().find(tail_type);
  if (!head) throw LookupError("unknown entity type '" + head_type + "'");
  if (!tail) throw LookupError("unknown entity type '" + tail_type + "'");

  std::set<std::tuple<TypeId, RelationId, TypeId>> schemes;
  for (const auto& t : graph.triples()) schemes.emplace(graph.type_of(t.head), t.relation, graph.type_of(t.tail));

  std::set<std::pair<std::size_t, std::vector<MetapathStep>>> found;
  std::vector<MetapathStep> path;
  auto walk = [&](auto&& self, TypeId at) -> void {
    if (!path.empty() && at == *tail) found.emplace(path.size(), path);
    if (path.size() == max_len) return;
    for (const auto& [h, r, t] : schemes) {
      if (h == at) {
        path.push_back({graph.relations().name(r), false});
        self(self, t);
        path.pop_back();
      }
      if (allow_inverse && t == at) {
        path.push_back({graph.relations().name(r), true});
        self(self, h);
        path.pop_back();
      }
    }
  };
  walk(walk, *head);

  std::vector<Metapath> out;
  for (auto& [len, steps] : found) out.push_back(Metapath{head_type, steps, tail_type});
  return out;
}

std::vector<Metapath> parse_metapaths(std::istream& in) {
  std::vector<Metapath> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (kg::trim(line).empty() || line.front() == '#') continue;
    const auto fields = kg::split_tabs(line);
    if (fields.size() != 3) throw ParseError(number, "expected 3 tab-separated fields");
    Metapath m{std::string(kg::trim(fields[0])), {}, std::string(kg::trim(fields[2]))};
    std::string_view rest = fields[1];
    while (true) {
      const auto cut = rest.find(';');
      std::string_view token = kg::trim(rest.substr(0, cut));
      MetapathStep step;
      if (!token.empty() && token.front() == '~') {
        step.inverse = true;
        token.remove_prefix(1);
      }
      if (token.empty()) throw ParseError(number, "empty relation in metapath");
      step.relation = std::string(token);
      m.steps.push_back(std::move(step));
      if (cut == std::string_view::npos) break;
      rest.remove_prefix(cut + 1);
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<Metapath> load_metapaths(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return parse_metapaths(in);
}

void write_metapaths(std::ostream& out, const std::vector<Metapath>& paths) {
  for (const auto& m : paths) out << m.head_type << '\t' << m.relation_string() << '\t' << m.tail_type << '\n';
}

namespace {

struct Resolved {
  RelationId relation;
  bool inverse;
};

class Walker {
 public:
  Walker(const kg::KnowledgeGraph& graph, EntityId u, EntityId v, bool drop_pair)
      : graph_(graph), u_(u), v_(v), drop_pair_(drop_pair) {}

  bool blocked(const kg::Triple& t) const {
    return drop_pair_ && ((t.head == u_ && t.tail == v_) || (t.head == v_ && t.tail == u_));
  }

  // Calls fn(triple, next) for each edge leaving `x` along `step`.
  template <typename Fn>
  void forward(EntityId x, Resolved step, Fn&& fn) const {
    const auto edges = step.inverse ? graph_.incoming(x) : graph_.outgoing(x);
    for (auto i : edges) {
      const auto& t = graph_.triples()[i];
      if (t.relation != step.relation || blocked(t)) continue;
      fn(t, step.inverse ? t.head : t.tail);
    }
  }

  // Calls fn(triple, previous) for each edge entering `y` along `step`.
  template <typename Fn>
  void backward(EntityId y, Resolved step, Fn&& fn) const {
    const auto edges = step.inverse ? graph_.outgoing(y) : graph_.incoming(y);
    for (auto i : edges) {
      const auto& t = graph_.triples()[i];
      if (t.relation != step.relation || blocked(t)) continue;
      fn(t, step.inverse ? t.tail : t.head);
    }
  }

 private:
  const kg::KnowledgeGraph& graph_;
  EntityId u_, v_;
  bool drop_pair_;
};

void sort_unique(std::vector<EntityId>& xs) {
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
}

}  // namespace

SemanticSubgraph extract_semantic(const kg::KnowledgeGraph& graph, EntityId u, EntityId v,
                                  const std::vector<Metapath>& metapaths, bool drop_pair_edges) {
  if (u.index() >= graph.entity_count() || v.index() >= graph.entity_count())
    throw LookupError("extract_semantic: unknown entity");
  const Walker walker(graph, u, v, drop_pair_edges);
  std::set<kg::Triple> edges;

  for (const auto& m : metapaths) {
    if (m.head_type != graph.type_name(u) || m.tail_type != graph.type_name(v) || m.steps.empty()) continue;
    std::vector<Resolved> steps;
    for (const auto& s : m.steps) {
      const auto r = graph.relations().find(s.relation);
      if (!r) throw LookupError("metapath relation '" + s.relation + "' not in graph");
      steps.push_back({*r, s.inverse});
    }
    const std::size_t k = steps.size();
    std::vector<std::vector<EntityId>> layer(k + 1);
    layer[0] = {u};
    for (std::size_t i = 0; i < k; ++i) {
      for (EntityId x : layer[i]) walker.forward(x, steps[i], [&](const kg::Triple&, EntityId y) { layer[i + 1].push_back(y); });
      sort_unique(layer[i + 1]);
    }
    if (!std::binary_search(layer[k].begin(), layer[k].end(), v)) continue;
    // Keep only layer members that still reach v, collecting edges as we go.
    std::vector<EntityId> alive{v};
    for (std::size_t i = k; i-- > 0;) {
      std::vector<EntityId> prev;
      for (EntityId y : alive) {
        walker.backward(y, steps[i], [&](const kg::Triple& t, EntityId x) {
          if (!std::binary_search(layer[i].begin(), layer[i].end(), x)) return;
          edges.insert(t);
          prev.push_back(x);
        });
      }
      sort_unique(prev);
      alive = std::move(prev);
    }
  }

  SemanticSubgraph out;
  std::vector<EntityId> inner;
  for (const auto& t : edges) inner.push_back(t.head), inner.push_back(t.tail);
  sort_unique(inner);
  out.nodes.push_back(u);
  if (v != u) out.nodes.push_back(v);
  for (EntityId e : inner)
    if (e != u && e != v) out.nodes.push_back(e);
  std::unordered_map<EntityId, std::uint32_t> index;
  for (std::uint32_t i = 0; i < out.nodes.size(); ++i) index.emplace(out.nodes[i], i);
  auto local = [&](EntityId e) { return index.at(e); };
  for (EntityId e : out.nodes) out.types.push_back(graph.type_of(e));
  for (const auto& t : edges) out.edges.push_back({local(t.head), t.relation, local(t.tail)});
  std::sort(out.edges.begin(), out.edges.end());
  return out;
}

}  // namespace dlp::sub
