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
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "dlp/common/error.hpp"

namespace dlp::ad {

/// Row-major dense array. Every operation in diffcore works on rank-2 views
/// (rows x cols); higher ranks are carried for storage only.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, T fill = T(0))
      : shape_{rows, cols}, data_(rows * cols, fill) {}
  Tensor(std::vector<std::size_t> shape, std::vector<T> values)
      : shape_(std::move(shape)), data_(std::move(values)) {
    if (element_count(shape_) != data_.size()) {
      throw ShapeError("tensor: value count does not match shape");
    }
  }

  static Tensor matrix(std::size_t rows, std::size_t cols, std::initializer_list<T> values) {
    return Tensor({rows, cols}, std::vector<T>(values));
  }
  static Tensor row(std::initializer_list<T> values) {
    return Tensor({1, values.size()}, std::vector<T>(values));
  }
  static Tensor scalar(T v) { return Tensor({1, 1}, {v}); }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
  std::size_t cols() const { return shape_.size() < 2 ? (shape_.empty() ? 0 : 1) : data_.size() / shape_[0]; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  bool same_shape(const Tensor& o) const { return rows() == o.rows() && cols() == o.cols(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  std::span<T> row_span(std::size_t r) { return std::span<T>(data_).subspan(r * cols(), cols()); }
  std::span<const T> row_span(std::size_t r) const {
    return std::span<const T>(data_).subspan(r * cols(), cols());
  }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  T item() const {
    if (data_.size() != 1) throw ShapeError("item: tensor is not a single element");
    return data_[0];
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  template <typename U>
  Tensor<U> cast() const {
    return Tensor<U>(shape_, std::vector<U>(data_.begin(), data_.end()));
  }

  std::string shape_string() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) s += (i ? "," : "") + std::to_string(shape_[i]);
    return s + "]";
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

  static std::size_t element_count(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  }

 private:
  std::vector<std::size_t> shape_;
  std::vector<T> data_;
};

/// A named trainable tensor and its accumulated gradient.
template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;

  Parameter() = default;
  Parameter(std::string n, Tensor<T> v) : name(std::move(n)), value(std::move(v)) {
    grad = Tensor<T>(value.shape(), std::vector<T>(value.size(), T(0)));
  }

  void zero_grad() { grad.fill(T(0)); }
};

}  // namespace dlp::ad
