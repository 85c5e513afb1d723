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

#include "dlp/harness/synthetic.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "dlp/common/error.hpp"
#include "dlp/common/rng.hpp"
#include "dlp/kgstore/tsv.hpp"

namespace dlp::harness {

namespace {

struct Scheme {
  const char* head;
  const char* tail;
  double per_source;
  std::vector<std::pair<const char*, kg::SmoothedClass>> relations;
};

const std::vector<Scheme>& schemes() {
  using enum kg::SmoothedClass;
  static const std::vector<Scheme> s = {
      {"drug", "gene", 3.0, {{"inhibits", negative}, {"activates", positive}, {"binds", interaction}}},
      {"gene", "gene", 2.0, {{"upregulates", positive}, {"downregulates", negative}, {"interacts_with", interaction}}},
      {"gene", "disease", 1.5, {{"promotes", positive}, {"suppresses", negative}, {"associated_with", interaction}}},
      {"drug", "disease", 1.0, {{"treats", negative}, {"exacerbates", positive}}},
      {"drug", "drug", 0.5, {{"synergizes", positive}, {"antagonizes", negative}}},
  };
  return s;
}

std::string entity_name(const char* type, std::size_t community, std::size_t index) {
  return std::string(type) + "_c" + std::to_string(community) + "_" + std::to_string(index);
}

}  // namespace

SyntheticBenchmark generate_synthetic(const SyntheticConfig& config) {
  if (config.communities < 2) throw PreconditionError("synthetic: at least two communities are required");
  if (config.drugs < 2 || config.genes < 1 || config.diseases < 1)
    throw PreconditionError("synthetic: every community needs at least two drugs, one gene and one disease");
  if (config.cross_fraction < 0 || config.cross_fraction > 1)
    throw PreconditionError("synthetic: cross_fraction must lie in [0, 1]");
  Rng rng(config.seed);
  SyntheticBenchmark bench;
  kg::KnowledgeGraph::Builder builder;

  std::map<std::string, std::vector<std::vector<EntityId>>> members;  // type -> community -> ids
  const std::pair<const char*, std::size_t> types[] = {
      {"drug", config.drugs}, {"gene", config.genes}, {"disease", config.diseases}};
  for (const auto& [type, count] : types) {
    auto& by_community = members[type];
    by_community.resize(config.communities);
    for (std::size_t c = 0; c < config.communities; ++c) {
      for (std::size_t i = 0; i < count; ++i) {
        const EntityId id = builder.entity(entity_name(type, c, i), type);
        by_community[c].push_back(id);
        bench.community.resize(id.index() + 1);
        bench.community[id.index()] = static_cast<std::uint32_t>(c);
      }
    }
  }
  for (const auto& s : schemes()) {
    for (const auto& [name, cls] : s.relations) {
      builder.relation(name);
      bench.smoothing.classes.emplace(name, cls);
    }
  }
  bench.smoothing.unmapped = kg::UnmappedPolicy::strict;

  for (const auto& s : schemes()) {
    const auto& heads = members.at(s.head);
    const auto& tails = members.at(s.tail);
    const double expected = s.per_source * config.degree;
    for (std::size_t c = 0; c < config.communities; ++c) {
      for (EntityId h : heads[c]) {
        for (std::size_t d = 0; d < config.communities; ++d) {
          const double share = c == d ? 1.0 - config.cross_fraction
                                      : config.cross_fraction / static_cast<double>(config.communities - 1);
          const double p = std::min(1.0, expected * share / static_cast<double>(tails[d].size()));
          for (EntityId t : tails[d]) {
            if (t == h || rng.uniform() >= p) continue;
            const char* rel = s.relations[rng.below(s.relations.size())].first;
            builder.add(kg::Triple{h, builder.relation(rel), t});
          }
        }
      }
    }
  }
  bench.graph = std::move(builder).build();

  auto& links = bench.links;
  links.mode = config.mode;
  const std::size_t k = config.communities;
  if (config.mode == kg::TaskMode::binary) {
    links.classes = {"0", "1"};
    const auto& drugs = members.at("drug");
    const auto& genes = members.at("gene");
    std::set<std::pair<EntityId, EntityId>> seen;
    const std::size_t want_pos = config.links / 2, want_neg = config.links - config.links / 2;
    std::size_t pos = 0, neg = 0, guard = 0;
    while ((pos < want_pos || neg < want_neg) && guard++ < config.links * 1000) {
      const std::size_t c = rng.below(k);
      const bool positive = pos < want_pos && (neg >= want_neg || rng.coin());
      std::size_t d = c;
      if (!positive) d = (c + 1 + rng.below(k - 1)) % k;
      const EntityId u = drugs[c][rng.below(drugs[c].size())];
      const EntityId v = genes[d][rng.below(genes[d].size())];
      if (!seen.emplace(u, v).second) continue;
      links.examples.push_back({u, v, {positive ? 1u : 0u}});
      (positive ? pos : neg)++;
    }
  } else if (config.mode == kg::TaskMode::multi_class) {
    for (std::size_t c = 0; c < k; ++c) links.classes.push_back("same_" + std::to_string(c));
    links.classes.push_back("cross");
    const auto& drugs = members.at("drug");
    std::set<std::pair<EntityId, EntityId>> seen;
    std::size_t guard = 0;
    while (links.examples.size() < config.links && guard++ < config.links * 1000) {
      const std::uint32_t cls = static_cast<std::uint32_t>(rng.below(k + 1));
      const std::size_t c = cls < k ? cls : rng.below(k);
      const std::size_t d = cls < k ? cls : (c + 1 + rng.below(k - 1)) % k;
      const EntityId u = drugs[c][rng.below(drugs[c].size())];
      const EntityId v = drugs[d][rng.below(drugs[d].size())];
      if (u == v || !seen.emplace(u, v).second) continue;
      links.examples.push_back({u, v, {cls}});
    }
  } else {
    throw PreconditionError("synthetic: multi-label generation is not supported");
  }
  if (links.examples.size() < config.links) throw ExhaustedError("synthetic: not enough distinct task pairs");
  return bench;
}

void write_benchmark(const SyntheticBenchmark& bench, const std::string& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(std::filesystem::path(dir) / name);
    if (!out) throw Error("cannot write " + (std::filesystem::path(dir) / name).string());
    return out;
  };
  {
    auto out = open("triples.tsv");
    kg::write_triples(out, bench.graph);
  }
  {
    auto out = open("types.tsv");
    kg::write_types(out, bench.graph);
  }
  {
    auto out = open("smoothing.tsv");
    for (const auto& [rel, cls] : bench.smoothing.classes)
      out << rel << '\t' << kg::kSmoothedClassNames[static_cast<std::size_t>(cls)] << '\n';
  }
  {
    auto out = open("links.tsv");
    kg::write_links(out, bench.graph, bench.links);
  }
}

}  // namespace dlp::harness
