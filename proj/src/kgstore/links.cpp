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

#include "dlp/kgstore/links.hpp"

#include <algorithm>
#include <fstream>

#include "dlp/common/error.hpp"
#include "dlp/kgstore/tsv.hpp"

namespace dlp::kg {

TaskMode parse_task_mode(std::string_view name) {
  if (name == "binary") return TaskMode::binary;
  if (name == "multi_class") return TaskMode::multi_class;
  if (name == "multi_label") return TaskMode::multi_label;
  throw ConfigError("unknown task mode '" + std::string(name) + "'");
}

std::string_view to_string(TaskMode mode) {
  switch (mode) {
    case TaskMode::binary: return "binary";
    case TaskMode::multi_class: return "multi_class";
    case TaskMode::multi_label: return "multi_label";
  }
  return "?";
}

namespace {

std::uint32_t class_index(std::vector<std::string>& classes, std::string_view name) {
  auto it = std::find(classes.begin(), classes.end(), name);
  if (it != classes.end()) return static_cast<std::uint32_t>(it - classes.begin());
  classes.emplace_back(name);
  return static_cast<std::uint32_t>(classes.size() - 1);
}

}  // namespace

LinkSet parse_links(std::istream& in, const KnowledgeGraph& graph, TaskMode mode,
                    std::vector<std::string> classes) {
  LinkSet set;
  set.mode = mode;
  set.classes = std::move(classes);
  if (mode == TaskMode::binary) set.classes = {"0", "1"};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (trim(view).empty() || view.front() == '#') continue;
    auto fields = split_tabs(view);
    if (fields.size() != 3) throw ParseError(lineno, "expected head<TAB>tail<TAB>label");
    LinkExample ex;
    auto head = graph.entities().find(fields[0]);
    auto tail = graph.entities().find(fields[1]);
    if (!head || !tail) {
      throw ParseError(lineno, "unknown entity '" + std::string(head ? fields[1] : fields[0]) + "'");
    }
    ex.head = *head;
    ex.tail = *tail;
    const std::string_view label = trim(fields[2]);
    switch (mode) {
      case TaskMode::binary:
        if (label != "0" && label != "1") throw ParseError(lineno, "binary label must be 0 or 1");
        ex.labels = {label == "1" ? 1u : 0u};
        break;
      case TaskMode::multi_class:
        if (label.empty() || label.find(';') != std::string_view::npos) {
          throw ParseError(lineno, "multi-class label must be a single class name");
        }
        ex.labels = {class_index(set.classes, label)};
        break;
      case TaskMode::multi_label: {
        std::string_view rest = label;
        while (!rest.empty()) {
          const auto pos = rest.find(';');
          const auto name = trim(rest.substr(0, pos));
          if (!name.empty()) ex.labels.push_back(class_index(set.classes, name));
          if (pos == std::string_view::npos) break;
          rest.remove_prefix(pos + 1);
        }
        std::sort(ex.labels.begin(), ex.labels.end());
        ex.labels.erase(std::unique(ex.labels.begin(), ex.labels.end()), ex.labels.end());
        break;
      }
    }
    set.examples.push_back(std::move(ex));
  }
  return set;
}

LinkSet load_links(const std::string& path, const KnowledgeGraph& graph, TaskMode mode) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return parse_links(in, graph, mode);
}

void write_links(std::ostream& out, const KnowledgeGraph& graph, const LinkSet& links) {
  for (const auto& ex : links.examples) {
    out << graph.entities().name(ex.head) << '\t' << graph.entities().name(ex.tail) << '\t';
    if (links.mode == TaskMode::binary) {
      out << ex.labels.at(0);
    } else {
      for (std::size_t i = 0; i < ex.labels.size(); ++i) {
        if (i) out << ';';
        out << links.classes.at(ex.labels[i]);
      }
    }
    out << '\n';
  }
}

std::uint32_t stratum_of(const LinkExample& example) {
  return example.labels.empty() ? ~std::uint32_t{0} : example.labels.front();
}

}  // namespace dlp::kg
