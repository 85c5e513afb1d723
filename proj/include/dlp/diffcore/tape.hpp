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

#include <cstddef>
#include <deque>
#include <functional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dlp/common/error.hpp"
#include "dlp/diffcore/tensor.hpp"

namespace dlp::ad {

template <typename T>
class Tape;

/// Handle to a value recorded on a Tape.
template <typename T>
struct Var {
  Tape<T>* tape = nullptr;
  std::size_t id = 0;

  const Tensor<T>& value() const { return tape->value(id); }
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
};

/// Records primitive applications in execution order and replays their
/// vector-Jacobian products in reverse.
///
/// A tape is confined to one thread. Parameters bound through leaf() receive
/// their gradient on backward(); repeated backward passes accumulate.
template <typename T>
class Tape {
 public:
  using Backward = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<T> constant(Tensor<T> value) { return push(std::move(value), false, {}, nullptr); }

  /// Binds a parameter; repeated calls return the same node.
  Var<T> leaf(Parameter<T>& p) {
    if (auto it = leaves_.find(&p); it != leaves_.end()) return Var<T>{this, it->second};
    Var<T> v = push(p.value, true, {}, &p);
    leaves_.emplace(&p, v.id);
    return v;
  }

  /// Records an operation result. The backward closure runs only when some
  /// parent needs a gradient.
  Var<T> record(Tensor<T> value, std::initializer_list<std::size_t> parents, Backward fn) {
    bool needs = false;
    for (auto p : parents) needs = needs || nodes_.at(p).needs_grad;
    return push(std::move(value), needs, needs ? std::move(fn) : Backward{}, nullptr);
  }
  Var<T> record(Tensor<T> value, const std::vector<std::size_t>& parents, Backward fn) {
    bool needs = false;
    for (auto p : parents) needs = needs || nodes_.at(p).needs_grad;
    return push(std::move(value), needs, needs ? std::move(fn) : Backward{}, nullptr);
  }

  const Tensor<T>& value(std::size_t id) const { return nodes_.at(id).value; }
  bool needs_grad(std::size_t id) const { return nodes_.at(id).needs_grad; }

  /// Gradient buffer of a node, zero-initialised on first access.
  Tensor<T>& grad(std::size_t id) {
    Node& n = nodes_.at(id);
    if (n.grad.empty() && !n.value.empty()) n.grad = Tensor<T>(n.value.shape(), std::vector<T>(n.value.size(), T(0)));
    return n.grad;
  }
  bool has_grad(std::size_t id) const { return !nodes_.at(id).grad.empty(); }

  /// Seeds d(output)/d(output) = 1 and walks the tape backwards once.
  void backward(Var<T> output) {
    if (output.tape != this || output.id >= nodes_.size()) {
      throw PreconditionError("backward: output was not recorded on this tape");
    }
    if (nodes_[output.id].value.size() != 1) {
      throw ShapeError("backward: output must hold exactly one element");
    }
    for (auto& n : nodes_) n.grad = Tensor<T>();
    grad(output.id)[0] = T(1);
    for (std::size_t i = output.id + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!n.needs_grad || n.grad.empty()) continue;
      if (n.param) {
        auto g = n.grad.values();
        auto dst = n.param->grad.values();
        for (std::size_t k = 0; k < g.size(); ++k) dst[k] += g[k];
      } else if (n.backward) {
        n.backward(*this, i);
      }
    }
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    bool needs_grad = false;
    Backward backward;
    Parameter<T>* param = nullptr;
  };

  Var<T> push(Tensor<T> value, bool needs, Backward fn, Parameter<T>* param) {
    nodes_.push_back(Node{std::move(value), Tensor<T>(), needs, std::move(fn), param});
    return Var<T>{this, nodes_.size() - 1};
  }

  std::deque<Node> nodes_;  // stable references across push_back
  std::unordered_map<const Parameter<T>*, std::size_t> leaves_;
};

}  // namespace dlp::ad
