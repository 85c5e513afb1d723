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

#include "dlp/diffcore/kernels.hpp"

namespace dlp::ad::kernels {
namespace {

template <typename T>
T dot(const T* a, const T* b, std::size_t n) {
  T s = 0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

template <typename T>
void axpy(T alpha, const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <typename T>
void mul_acc(const T* a, const T* b, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a[i] * b[i];
}

template <typename T>
void add(const T* a, const T* b, T* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

template <typename T>
void mul(const T* a, const T* b, T* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

template <typename T>
T sum(const T* a, std::size_t n) {
  T s = 0;
  for (std::size_t i = 0; i < n; ++i) s += a[i];
  return s;
}

}  // namespace

template <typename T>
const KernelTable<T>& scalar_table() {
  static const KernelTable<T> table{&dot<T>, &axpy<T>, &mul_acc<T>, &add<T>, &mul<T>, &sum<T>};
  return table;
}

template const KernelTable<float>& scalar_table<float>();
template const KernelTable<double>& scalar_table<double>();

}  // namespace dlp::ad::kernels
