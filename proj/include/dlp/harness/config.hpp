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
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace dlp::harness {

struct ConfigKey {
  std::string_view name;
  std::string_view default_value;
  std::string_view help;
};

/// Every recognised configuration key with its default.
const std::vector<ConfigKey>& config_keys();

/// Flat key=value configuration. Lookups fall back to the registered
/// defaults; setting an unregistered key raises ConfigError.
class RunConfig {
 public:
  RunConfig() = default;

  void set(std::string_view key, std::string_view value);
  bool has_override(std::string_view key) const { return values_.contains(std::string(key)); }

  /// Reads `key = value` lines; `#` starts a comment.
  void merge_file(std::istream& in);
  void merge_file(const std::string& path);

  std::string get(std::string_view key) const;
  std::int64_t get_int(std::string_view key) const;
  std::size_t get_size(std::string_view key) const;
  std::uint64_t get_u64(std::string_view key) const;
  double get_double(std::string_view key) const;
  bool get_bool(std::string_view key) const;
  std::vector<std::string> get_list(std::string_view key) const;
  std::vector<double> get_doubles(std::string_view key) const;

  /// Effective configuration (defaults merged with overrides), sorted by key.
  std::map<std::string, std::string> effective() const;

 private:
  std::map<std::string, std::string> values_;
};

bool is_config_key(std::string_view key);

}  // namespace dlp::harness
