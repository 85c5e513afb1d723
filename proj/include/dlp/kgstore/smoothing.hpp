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

#include <array>
#include <istream>
#include <map>
#include <string>
#include <string_view>

#include "dlp/kgstore/knowledge_graph.hpp"

namespace dlp::kg {

enum class SmoothedClass { positive = 0, interaction = 1, negative = 2 };

inline constexpr std::array<std::string_view, 3> kSmoothedClassNames = {"positive", "interaction",
                                                                        "negative"};

/// What to do with relations the map does not mention.
enum class UnmappedPolicy { keep, drop, strict };

struct SmoothingMap {
  std::map<std::string, SmoothedClass, std::less<>> classes;
  UnmappedPolicy unmapped = UnmappedPolicy::strict;
};

/// Reads `relation<TAB>{positive|interaction|negative}` lines.
SmoothingMap parse_smoothing(std::istream& in, UnmappedPolicy unmapped = UnmappedPolicy::strict);
SmoothingMap load_smoothing(const std::string& path, UnmappedPolicy unmapped = UnmappedPolicy::strict);

/// Rewrites every mapped triple onto its coarse class. The output relation
/// vocabulary starts with positive, interaction, negative (ids 0..2),
/// followed by kept unmapped relations. The entity vocabulary is unchanged.
KnowledgeGraph smooth_relations(const KnowledgeGraph& graph, const SmoothingMap& map);

}  // namespace dlp::kg
