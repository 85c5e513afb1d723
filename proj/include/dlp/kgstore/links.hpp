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
#include <string_view>
#include <vector>

#include "dlp/kgstore/knowledge_graph.hpp"

namespace dlp::kg {

enum class TaskMode { binary, multi_class, multi_label };

TaskMode parse_task_mode(std::string_view name);
std::string_view to_string(TaskMode mode);

/// A queried link and its label.
///
/// `labels` holds {0} or {1} for binary tasks, the single class index for
/// multi-class tasks, and the sorted set of positive class indices for
/// multi-label tasks (possibly empty for a negative counterpart).
struct LinkExample {
  EntityId head;
  EntityId tail;
  std::vector<std::uint32_t> labels;

  friend auto operator<=>(const LinkExample&, const LinkExample&) = default;
};

struct LinkSet {
  TaskMode mode = TaskMode::binary;
  /// Class names for multi-class / multi-label tasks; {"0","1"} for binary.
  std::vector<std::string> classes;
  std::vector<LinkExample> examples;

  std::size_t class_count() const { return mode == TaskMode::binary ? 1 : classes.size(); }
};

/// Reads `head<TAB>tail<TAB>label`. Class names are assigned indices in
/// first-seen order unless `classes` is pre-seeded.
LinkSet parse_links(std::istream& in, const KnowledgeGraph& graph, TaskMode mode,
                    std::vector<std::string> classes = {});
LinkSet load_links(const std::string& path, const KnowledgeGraph& graph, TaskMode mode);
void write_links(std::ostream& out, const KnowledgeGraph& graph, const LinkSet& links);

/// Class used for stratification: the first label, or a sentinel for an
/// empty multi-label set.
std::uint32_t stratum_of(const LinkExample& example);

}  // namespace dlp::kg
