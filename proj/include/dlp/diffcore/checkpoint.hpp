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
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "dlp/diffcore/tensor.hpp"

namespace dlp::ad {

enum class Precision { f32, f64 };

/// Container file layout:
///
///   DLPCKPT1\n
///   meta <key> <value...>\n                         (zero or more)
///   tensor <name> <f32|f64> <d0,d1,...> <offset> <bytes>\n
///   end\n
///   <blob: little-endian values, offsets relative to blob start>
///
/// Names and meta keys contain no whitespace; meta values run to end of line.
class Checkpoint {
 public:
  using Entry = std::variant<Tensor<float>, Tensor<double>>;

  void put(const std::string& name, Tensor<float> t) { put_entry(name, std::move(t)); }
  void put(const std::string& name, Tensor<double> t) { put_entry(name, std::move(t)); }
  void set_meta(const std::string& key, const std::string& value);

  bool has(const std::string& name) const { return tensors_.contains(name); }
  Precision precision(const std::string& name) const;
  /// Returns the tensor converted to T (throws LookupError if absent).
  template <typename T>
  Tensor<T> get(const std::string& name) const;
  const std::string& meta(const std::string& key) const;
  const std::map<std::string, std::string>& metadata() const { return meta_; }
  std::vector<std::string> names() const { return order_; }

  void write(std::ostream& out) const;
  static Checkpoint read(std::istream& in);
  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;

 private:
  void put_entry(const std::string& name, Entry e);

  std::vector<std::string> order_;
  std::map<std::string, Entry> tensors_;
  std::map<std::string, std::string> meta_;
};

inline constexpr const char* kCheckpointMagic = "DLPCKPT1";

}  // namespace dlp::ad
