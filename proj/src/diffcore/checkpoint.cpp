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

#include "dlp/diffcore/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <iterator>
#include <cstring>
#include <fstream>
#include <sstream>

namespace dlp::ad {
namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename U>
U to_little(U v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    unsigned char b[sizeof(U)];
    std::memcpy(b, &v, sizeof(U));
    std::reverse(b, b + sizeof(U));
    std::memcpy(&v, b, sizeof(U));
    return v;
  }
}

template <typename T>
void append_values(std::string& blob, const Tensor<T>& t) {
  using Bits = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  for (T v : t.values()) {
    const Bits b = to_little(std::bit_cast<Bits>(v));
    blob.append(reinterpret_cast<const char*>(&b), sizeof(b));
  }
}

template <typename T>
Tensor<T> decode(const std::string& blob, std::size_t offset, std::vector<std::size_t> shape) {
  using Bits = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  const std::size_t count = Tensor<T>::element_count(shape);
  if (offset + count * sizeof(T) > blob.size()) throw ParseError(0, "checkpoint: tensor data truncated");
  std::vector<T> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    Bits b;
    std::memcpy(&b, blob.data() + offset + i * sizeof(T), sizeof(T));
    values[i] = std::bit_cast<T>(to_little(b));
  }
  return Tensor<T>(std::move(shape), std::move(values));
}

void check_token(const std::string& s, const char* what) {
  if (s.empty() || s.find_first_of(" \t\n\r") != std::string::npos) {
    throw ConfigError(std::string("checkpoint: invalid ") + what + " '" + s + "'");
  }
}

}  // namespace

void Checkpoint::put_entry(const std::string& name, Entry e) {
  check_token(name, "tensor name");
  if (!tensors_.contains(name)) order_.push_back(name);
  tensors_[name] = std::move(e);
}

void Checkpoint::set_meta(const std::string& key, const std::string& value) {
  check_token(key, "meta key");
  if (value.find('\n') != std::string::npos) throw ConfigError("checkpoint: meta value contains a newline");
  meta_[key] = value;
}

Precision Checkpoint::precision(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw LookupError("checkpoint: no tensor '" + name + "'");
  return std::holds_alternative<Tensor<float>>(it->second) ? Precision::f32 : Precision::f64;
}

template <typename T>
Tensor<T> Checkpoint::get(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw LookupError("checkpoint: no tensor '" + name + "'");
  return std::visit([](const auto& t) { return t.template cast<T>(); }, it->second);
}

template Tensor<float> Checkpoint::get<float>(const std::string&) const;
template Tensor<double> Checkpoint::get<double>(const std::string&) const;

const std::string& Checkpoint::meta(const std::string& key) const {
  auto it = meta_.find(key);
  if (it == meta_.end()) throw LookupError("checkpoint: no meta key '" + key + "'");
  return it->second;
}

void Checkpoint::write(std::ostream& out) const {
  std::string blob;
  std::ostringstream manifest;
  manifest << kCheckpointMagic << '\n';
  for (const auto& [k, v] : meta_) manifest << "meta " << k << ' ' << v << '\n';
  for (const auto& name : order_) {
    const auto& entry = tensors_.at(name);
    const std::size_t offset = blob.size();
    std::visit([&](const auto& t) { append_values(blob, t); }, entry);
    const auto& shape = std::visit([](const auto& t) -> const std::vector<std::size_t>& { return t.shape(); }, entry);
    manifest << "tensor " << name << ' ' << (std::holds_alternative<Tensor<float>>(entry) ? "f32" : "f64") << ' ';
    for (std::size_t i = 0; i < shape.size(); ++i) manifest << (i ? "," : "") << shape[i];
    manifest << ' ' << offset << ' ' << (blob.size() - offset) << '\n';
  }
  manifest << "end\n";
  out << manifest.str();
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
}

Checkpoint Checkpoint::read(std::istream& in) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line) || line != kCheckpointMagic) {
    throw ParseError(1, "checkpoint: missing DLPCKPT1 header");
  }
  struct Pending {
    std::string name, precision;
    std::vector<std::size_t> shape;
    std::size_t offset, bytes;
  };
  std::vector<Pending> pending;
  Checkpoint ck;
  bool ended = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line == "end") {
      ended = true;
      break;
    }
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "meta") {
      std::string key;
      ls >> key;
      std::string value;
      std::getline(ls, value);
      if (!value.empty() && value.front() == ' ') value.erase(0, 1);
      ck.meta_[key] = value;
    } else if (kind == "tensor") {
      Pending p;
      std::string dims;
      if (!(ls >> p.name >> p.precision >> dims >> p.offset >> p.bytes)) {
        throw ParseError(lineno, "checkpoint: malformed tensor entry");
      }
      std::istringstream ds(dims);
      std::string d;
      while (std::getline(ds, d, ',')) p.shape.push_back(std::stoull(d));
      pending.push_back(std::move(p));
    } else {
      throw ParseError(lineno, "checkpoint: unknown manifest entry '" + kind + "'");
    }
  }
  if (!ended) throw ParseError(lineno, "checkpoint: manifest not terminated");
  std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  for (auto& p : pending) {
    if (p.precision == "f32") {
      ck.put(p.name, decode<float>(blob, p.offset, p.shape));
    } else if (p.precision == "f64") {
      ck.put(p.name, decode<double>(blob, p.offset, p.shape));
    } else {
      throw ParseError(0, "checkpoint: unknown precision '" + p.precision + "'");
    }
  }
  return ck;
}

void Checkpoint::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  write(out);
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return read(in);
}

}  // namespace dlp::ad
