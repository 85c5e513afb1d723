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

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "doctest.h"
#include "dlp/common/error.hpp"
#include "dlp/common/rng.hpp"
#include "dlp/subgraph/local.hpp"
#include "dlp/subgraph/semantic.hpp"
#include "test_support.hpp"

using namespace dlp;
using namespace dlp::sub;
using dlp::testing::graph_from;
using dlp::testing::random_graph;

namespace {

constexpr std::uint32_t kInf = 1u << 30;

// All-pairs hop distances from the raw triple list, optionally without the
// edge between `cut_a` and `cut_b`.
std::vector<std::vector<std::uint32_t>> floyd(const kg::KnowledgeGraph& g, int cut_a = -1, int cut_b = -1) {
  const std::size_t n = g.entity_count();
  std::vector<std::vector<std::uint32_t>> d(n, std::vector<std::uint32_t>(n, kInf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
  for (const auto& t : g.triples()) {
    const int h = static_cast<int>(t.head.index()), tl = static_cast<int>(t.tail.index());
    if (h == tl) continue;
    if ((h == cut_a && tl == cut_b) || (h == cut_b && tl == cut_a)) continue;
    d[h][tl] = d[tl][h] = 1;
  }
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][m] + d[m][j]);
  return d;
}

EntityId id(const kg::KnowledgeGraph& g, const char* name) { return g.entities().at(name); }

std::set<EntityId> as_set(const std::vector<EntityId>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST_CASE("khop_neighbors examples") {
  const auto g = graph_from("a\tr\tb\nb\tr\tc\n");
  CHECK(khop_neighbors(g, id(g, "b"), 0) == std::vector<EntityId>{id(g, "b")});
  CHECK(as_set(khop_neighbors(g, id(g, "a"), 1)) == std::set<EntityId>{id(g, "a"), id(g, "b")});
  CHECK(khop_neighbors(g, id(g, "a"), 2).size() == 3);
  CHECK_THROWS_AS(khop_neighbors(g, EntityId(10), 1), LookupError);
}

TEST_CASE("khop_neighbors matches an all-pairs oracle on 100 random graphs") {
  Rng rng(99);
  int matched = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 5 + rng.below(196);
    const auto g = random_graph(1000 + trial, n, n + rng.below(2 * n));
    const auto d = floyd(g);
    const auto src = EntityId(static_cast<std::uint32_t>(rng.below(n)));
    const auto k = static_cast<std::uint32_t>(rng.below(4));
    std::vector<EntityId> expect;
    for (std::size_t j = 0; j < n; ++j)
      if (d[src.index()][j] <= k) expect.emplace_back(static_cast<std::uint32_t>(j));
    matched += khop_neighbors(g, src, k) == expect;
  }
  CHECK(matched == 100);
}

TEST_CASE("extract_local examples") {
  const auto g = graph_from("u\tr\ta\na\tr\tv\n");
  const auto s = extract_local(g, id(g, "u"), id(g, "v"), LocalConfig{1, 64, true}, 1);
  CHECK(s.nodes == std::vector<EntityId>{id(g, "u"), id(g, "v"), id(g, "a")});
  CHECK(s.observed_edges == std::vector<NodePair>{{0, 2}, {1, 2}});
  CHECK(s.candidate_pairs.size() == 3);

  const auto far = graph_from("u\tr\tx\nx\tr\ty\nv\tr\tz\n");
  const auto f = extract_local(far, id(far, "u"), id(far, "v"), LocalConfig{1, 64, true}, 1);
  CHECK(f.nodes.size() == 2);
  CHECK(f.observed_edges.empty());
  CHECK(f.candidate_pairs == std::vector<NodePair>{{0, 1}});
}

TEST_CASE("extract_local drops the target edge") {
  const auto g = graph_from("u\tr\tv\nv\ts\tu\nu\tr\ta\na\tr\tv\n");
  const auto s = extract_local(g, id(g, "u"), id(g, "v"), LocalConfig{2, 64, true}, 1);
  for (const auto& e : s.observed_edges) CHECK_FALSE((e.first == 0 && e.second == 1));
  CHECK(s.nodes.size() == 3);
  const auto kept = extract_local(g, id(g, "u"), id(g, "v"), LocalConfig{2, 64, false}, 1);
  CHECK(std::find(kept.observed_edges.begin(), kept.observed_edges.end(), NodePair{0, 1}) !=
        kept.observed_edges.end());
}

TEST_CASE("extract_local node set matches the intersection oracle, k=2") {
  int matched = 0;
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = random_graph(500 + trial, 50, 60 + rng.below(60));
    const auto u = EntityId(static_cast<std::uint32_t>(rng.below(50)));
    auto v = EntityId(static_cast<std::uint32_t>(rng.below(49)));
    if (v.value >= u.value) ++v.value;
    const auto d = floyd(g, static_cast<int>(u.value), static_cast<int>(v.value));
    std::set<EntityId> expect{u, v};
    for (std::size_t j = 0; j < 50; ++j)
      if (d[u.index()][j] <= 2 && d[v.index()][j] <= 2) expect.emplace(static_cast<std::uint32_t>(j));
    const auto s = extract_local(g, u, v, LocalConfig{2, 1000, true}, 3);

    std::set<NodePair> edges;
    std::map<EntityId, std::uint32_t> local;
    for (std::uint32_t i = 0; i < s.nodes.size(); ++i) local[s.nodes[i]] = i;
    for (const auto& t : g.triples()) {
      if (!expect.contains(t.head) || !expect.contains(t.tail) || t.head == t.tail) continue;
      if ((t.head == u && t.tail == v) || (t.head == v && t.tail == u)) continue;
      auto a = local.at(t.head), b = local.at(t.tail);
      edges.emplace(std::min(a, b), std::max(a, b));
    }
    const bool ok = as_set(s.nodes) == expect && s.nodes[0] == u && s.nodes[1] == v &&
                    std::set<NodePair>(s.observed_edges.begin(), s.observed_edges.end()) == edges &&
                    s.observed_edges.size() == edges.size() &&
                    s.candidate_pairs.size() == s.nodes.size() * (s.nodes.size() - 1) / 2;
    matched += ok;
  }
  CHECK(matched == 100);
}

TEST_CASE("extract_local down-sampling keeps endpoints and nearest nodes") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = random_graph(seed, 120, 500);
    const EntityId u(0), v(1);
    const auto full = extract_local(g, u, v, LocalConfig{3, 100000, true}, seed);
    const auto cut = extract_local(g, u, v, LocalConfig{3, 16, true}, seed);
    CHECK(cut.nodes.size() == std::min<std::size_t>(16, full.nodes.size()));
    CHECK(cut.nodes[0] == u);
    CHECK(cut.nodes[1] == v);
    const auto pair = std::make_pair(u, v);
    const auto bu = hop_distances(g, u, 3, &pair), bv = hop_distances(g, v, 3, &pair);
    std::uint32_t worst_kept = 0;
    for (std::size_t i = 2; i < cut.nodes.size(); ++i)
      worst_kept = std::max(worst_kept, bu[cut.nodes[i].index()] + bv[cut.nodes[i].index()]);
    const auto kept = as_set(cut.nodes);
    for (auto e : full.nodes)
      if (!kept.contains(e)) CHECK(bu[e.index()] + bv[e.index()] >= worst_kept);
    CHECK(cut == extract_local(g, u, v, LocalConfig{3, 16, true}, seed));
    for (const auto& [a, b] : cut.observed_edges) {
      CHECK(a < b);
      CHECK(g.adjacent(cut.nodes[a], cut.nodes[b]));
    }
  }
  const auto g = random_graph(1, 10, 20);
  CHECK_THROWS_AS(extract_local(g, EntityId(0), EntityId(1), LocalConfig{2, 1, true}, 0), PreconditionError);
}

TEST_CASE("default_metapaths examples") {
  kg::KnowledgeGraph::Builder b;
  b.entity("d1", "drug");
  b.entity("g1", "gene");
  b.entity("s1", "disease");
  b.add("d1", "interaction", "g1");
  const auto g1 = kg::KnowledgeGraph::Builder(b).build();
  const auto one = default_metapaths(g1, "drug", "gene", 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0].relation_string() == "interaction");
  CHECK_THROWS_AS(default_metapaths(g1, "drug", "gene", 0), PreconditionError);
  CHECK_THROWS_AS(default_metapaths(g1, "drug", "protein", 1), LookupError);

  b.add("g1", "positive", "s1");
  const auto g2 = kg::KnowledgeGraph::Builder(b).build();
  const auto two = default_metapaths(g2, "drug", "disease", 2);
  std::vector<std::string> names;
  for (const auto& m : two) names.push_back(m.relation_string());
  CHECK(std::find(names.begin(), names.end(), "interaction;positive") != names.end());
  CHECK(default_metapaths(g2, "drug", "disease", 1).empty());
}

TEST_CASE("default_metapaths matches a brute-force sequence oracle") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = random_graph(seed + 40, 9, 6 + seed, 3);
    std::set<std::tuple<std::string, std::string, std::string>> schemes;
    for (const auto& t : g.triples())
      schemes.emplace(g.type_name(t.head), g.relations().name(t.relation), g.type_name(t.tail));
    std::vector<MetapathStep> alphabet;
    for (std::size_t r = 0; r < g.relation_count(); ++r)
      for (bool inv : {false, true}) alphabet.push_back({g.relations().name(RelationId(r)), inv});

    for (const char* head : {"drug", "gene"}) {
      for (const char* tail : {"gene", "disease", "drug"}) {
        std::set<std::string> expect;
        std::vector<MetapathStep> seq;
        std::function<void(std::set<std::string>)> grow = [&](std::set<std::string> at) {
          if (!seq.empty() && at.contains(tail)) {
            Metapath m{head, seq, tail};
            expect.insert(m.relation_string());
          }
          if (seq.size() == 3) return;
          for (const auto& s : alphabet) {
            std::set<std::string> next;
            for (const auto& [h, r, t] : schemes) {
              if (r != s.relation) continue;
              if (!s.inverse && at.contains(h)) next.insert(t);
              if (s.inverse && at.contains(t)) next.insert(h);
            }
            if (next.empty()) continue;
            seq.push_back(s);
            grow(next);
            seq.pop_back();
          }
        };
        grow({head});
        std::set<std::string> got;
        const auto paths = default_metapaths(g, head, tail, 3);
        for (const auto& m : paths) got.insert(m.relation_string());
        CHECK(got == expect);
        CHECK(got.size() == paths.size());
      }
    }
  }
}

TEST_CASE("metapath file round trip") {
  std::istringstream in("# comment\ndrug\tinteraction;~positive\tdisease\n\ngene\tnegative\tgene\n");
  const auto paths = parse_metapaths(in);
  REQUIRE(paths.size() == 2);
  CHECK(paths[0].steps.size() == 2);
  CHECK(paths[0].steps[1].inverse);
  CHECK(paths[0].steps[1].relation == "positive");
  std::ostringstream out;
  write_metapaths(out, paths);
  std::istringstream again(out.str());
  CHECK(parse_metapaths(again) == paths);
  std::istringstream bad("drug\tinteraction\n");
  CHECK_THROWS_AS(parse_metapaths(bad), ParseError);
  std::istringstream empty_step("drug\ta;;b\tgene\n");
  CHECK_THROWS_AS(parse_metapaths(empty_step), ParseError);
}

TEST_CASE("extract_semantic examples") {
  kg::KnowledgeGraph::Builder b;
  b.entity("u", "drug");
  b.entity("a", "gene");
  b.entity("v", "disease");
  b.entity("w", "gene");
  b.add("u", "interaction", "a");
  b.add("a", "positive", "v");
  b.add("u", "negative", "w");
  const auto g = std::move(b).build();
  const EntityId u = id(g, "u"), v = id(g, "v");

  const auto none = extract_semantic(g, u, v, {Metapath{"drug", {{"negative", false}}, "disease"}});
  CHECK(none.nodes == std::vector<EntityId>{u, v});
  CHECK(none.edges.empty());

  const Metapath two{"drug", {{"interaction", false}, {"positive", false}}, "disease"};
  const auto s = extract_semantic(g, u, v, {two, two});
  CHECK(s.nodes.size() == 3);
  CHECK(s.edges.size() == 2);
  CHECK(s.edges[0] == SemanticEdge{0, g.relations().at("interaction"), 2});
  CHECK(s.edges[1] == SemanticEdge{2, g.relations().at("positive"), 1});

  const auto inv = extract_semantic(g, v, u, {Metapath{"disease", {{"positive", true}, {"interaction", true}}, "drug"}});
  CHECK(inv.edges.size() == 2);

  CHECK_THROWS_AS(extract_semantic(g, u, v, {Metapath{"drug", {{"missing", false}}, "disease"}}), LookupError);
}

TEST_CASE("extract_semantic matches a walk-enumeration oracle") {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto g = random_graph(seed + 300, 24, 90, 3);
    Rng rng(seed);
    const auto u = EntityId(static_cast<std::uint32_t>(rng.below(24)));
    const auto v = EntityId(static_cast<std::uint32_t>(rng.below(24)));
    if (u == v) continue;
    const auto paths = default_metapaths(g, g.type_name(u), g.type_name(v), 3);
    const auto s = extract_semantic(g, u, v, paths);

    std::set<kg::Triple> expect;
    for (const auto& m : paths) {
      std::vector<kg::Triple> walk;
      std::function<void(EntityId, std::size_t)> go = [&](EntityId at, std::size_t i) {
        if (i == m.steps.size()) {
          if (at == v) expect.insert(walk.begin(), walk.end());
          return;
        }
        const auto r = g.relations().at(m.steps[i].relation);
        for (const auto& t : g.triples()) {
          if (t.relation != r) continue;
          if ((t.head == u && t.tail == v) || (t.head == v && t.tail == u)) continue;
          const EntityId from = m.steps[i].inverse ? t.tail : t.head;
          const EntityId to = m.steps[i].inverse ? t.head : t.tail;
          if (from != at) continue;
          walk.push_back(t);
          go(to, i + 1);
          walk.pop_back();
        }
      };
      go(u, 0);
    }
    std::set<kg::Triple> got;
    for (const auto& e : s.edges) {
      const kg::Triple t{s.nodes[e.head], e.relation, s.nodes[e.tail]};
      CHECK(g.contains(t));
      got.insert(t);
    }
    CHECK(got == expect);
    CHECK(got.size() == s.edges.size());
    CHECK(s.nodes[0] == u);
    CHECK(s.nodes[1] == v);
    CHECK(s == extract_semantic(g, u, v, paths));
    for (std::size_t i = 0; i < s.nodes.size(); ++i) CHECK(s.types[i] == g.type_of(s.nodes[i]));
    checked += !expect.empty();
  }
  CHECK(checked > 10);
}
