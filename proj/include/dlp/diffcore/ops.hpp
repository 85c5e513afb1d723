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
#include <span>
#include <vector>

#include "dlp/diffcore/tape.hpp"

namespace dlp::ad {

/// Reduction direction: `rows` collapses the row index (one value per
/// column, shape [1,n]); `cols` collapses columns (shape [m,1]).
enum class Axis { rows, cols };

/// One destination cell of scatter_elements, fed by values[src].
struct ElementRef {
  std::size_t row;
  std::size_t col;
  std::size_t src;
};

// Binary elementwise ops accept b with the shape of a, or broadcastable as
// [1,n], [m,1] or [1,1].
template <typename T> Var<T> add(Var<T> a, Var<T> b);
template <typename T> Var<T> sub(Var<T> a, Var<T> b);
template <typename T> Var<T> mul(Var<T> a, Var<T> b);
template <typename T> Var<T> div(Var<T> a, Var<T> b);
/// scale * a + shift
template <typename T> Var<T> affine(Var<T> a, T scale, T shift);

template <typename T> Var<T> matmul(Var<T> a, Var<T> b);
template <typename T> Var<T> transpose(Var<T> a);
template <typename T> Var<T> concat_cols(std::span<const Var<T>> parts);
template <typename T> Var<T> concat_rows(std::span<const Var<T>> parts);

template <typename T> Var<T> sum(Var<T> a, Axis axis);
template <typename T> Var<T> sum_all(Var<T> a);
template <typename T> Var<T> mean(Var<T> a, Axis axis);
template <typename T> Var<T> mean_all(Var<T> a);

template <typename T> Var<T> sigmoid(Var<T> a);
template <typename T> Var<T> relu(Var<T> a);
/// Domain: a > 0.
template <typename T> Var<T> log(Var<T> a);
template <typename T> Var<T> exp(Var<T> a);
template <typename T> Var<T> cos(Var<T> a);
template <typename T> Var<T> sin(Var<T> a);
/// Domain: a > 0 unless exponent is a positive integer.
template <typename T> Var<T> power(Var<T> a, T exponent);
/// Gradient passes only where lo <= a <= hi.
template <typename T> Var<T> clamp(Var<T> a, T lo, T hi);

/// Mean over rows of -log softmax(logits)[target], log-sum-exp shifted.
template <typename T> Var<T> softmax_cross_entropy(Var<T> logits, std::span<const std::size_t> targets);

/// Euclidean norm along an axis. The gradient at a zero norm is taken as 0.
template <typename T> Var<T> l2norm(Var<T> a, Axis axis);
/// Row-wise cosine similarity, shape [m,1]. Zero rows raise DomainError.
template <typename T> Var<T> cosine(Var<T> a, Var<T> b);

template <typename T> Var<T> gather_rows(Var<T> a, std::span<const std::size_t> index);
template <typename T> Var<T> gather_cols(Var<T> a, std::span<const std::size_t> index);
/// out[index[i], :] += a[i, :], out has `rows` rows.
template <typename T> Var<T> scatter_add_rows(Var<T> a, std::span<const std::size_t> index, std::size_t rows);
/// Builds a rows x cols matrix with out[r,c] += values.flat[src] for each ref.
template <typename T>
Var<T> scatter_elements(Var<T> values, std::span<const ElementRef> refs, std::size_t rows, std::size_t cols);

}  // namespace dlp::ad
