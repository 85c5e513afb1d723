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
#include <string_view>

namespace dlp::ad::kernels {

/// Inner-loop primitives. Every entry has a scalar reference implementation
/// and, where the CPU supports it, an AVX2+FMA variant; the table in use is
/// chosen once per process.
template <typename T>
struct KernelTable {
  /// sum_i a[i] * b[i]
  T (*dot)(const T* a, const T* b, std::size_t n);
  /// y[i] += alpha * x[i]
  void (*axpy)(T alpha, const T* x, T* y, std::size_t n);
  /// y[i] += a[i] * b[i]
  void (*mul_acc)(const T* a, const T* b, T* y, std::size_t n);
  /// out[i] = a[i] + b[i]
  void (*add)(const T* a, const T* b, T* out, std::size_t n);
  /// out[i] = a[i] * b[i]
  void (*mul)(const T* a, const T* b, T* out, std::size_t n);
  /// sum_i a[i]
  T (*sum)(const T* a, std::size_t n);
};

enum class Isa { scalar, avx2 };

template <typename T>
const KernelTable<T>& scalar_table();
/// Requires avx2 and fma at runtime; see avx2_supported().
template <typename T>
const KernelTable<T>& avx2_table();

bool avx2_supported();

/// Selected once from DLP_KERNELS (scalar | avx2 | auto, default auto).
Isa active_isa();
std::string_view isa_name(Isa isa);

template <typename T>
const KernelTable<T>& active() {
  static const KernelTable<T>& table = active_isa() == Isa::avx2 ? avx2_table<T>() : scalar_table<T>();
  return table;
}

// Row-major GEMM variants built on the active table.
// C(m,n) (+)= A(m,k) * B(k,n)
template <typename T>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool accumulate);
// C(m,n) (+)= A(m,k) * B(n,k)^T
template <typename T>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool accumulate);
// C(m,n) (+)= A(k,m)^T * B(k,n)
template <typename T>
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool accumulate);

}  // namespace dlp::ad::kernels
