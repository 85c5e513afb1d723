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
#include <string>
#include <vector>

#include "dlp/kgstore/knowledge_graph.hpp"
#include "dlp/kgstore/links.hpp"
#include "dlp/kgstore/smoothing.hpp"

namespace dlp::harness {

/// Planted-community benchmark. Entities of types drug, gene and disease
/// are split evenly into communities; each typed scheme draws edges mostly
/// inside a community. Binary task links are drug-gene pairs labelled 1
/// when both ends share a community; the multi-class task labels drug-drug
/// pairs by community pair (same-0, same-1, ..., cross).
struct SyntheticConfig {
  std::size_t communities = 2;
  std::size_t drugs = 40;     // per community
  std::size_t genes = 60;     // per community
  std::size_t diseases = 20;  // per community
  /// Expected out-edges per source entity, scaled for every scheme.
  double degree = 2.0;
  /// Fraction of edges crossing communities.
  double cross_fraction = 0.02;
  std::size_t links = 200;
  kg::TaskMode mode = kg::TaskMode::binary;
  std::uint64_t seed = 1;
};

struct SyntheticBenchmark {
  kg::KnowledgeGraph graph;
  kg::SmoothingMap smoothing;
  kg::LinkSet links;
  std::vector<std::uint32_t> community;  // per entity id
};

SyntheticBenchmark generate_synthetic(const SyntheticConfig& config);

/// Writes triples.tsv, types.tsv, smoothing.tsv and links.tsv into `dir`.
void write_benchmark(const SyntheticBenchmark& bench, const std::string& dir);

}  // namespace dlp::harness
