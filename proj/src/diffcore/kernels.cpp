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

#include <algorithm>
#include <cstdlib>
#include <string>

#include "dlp/common/error.hpp"
#include "dlp/diffcore/kernels.hpp"

namespace dlp::ad::kernels {

bool avx2_supported() {
#if defined(DLP_HAVE_AVX2_KERNELS) && (defined(__x86_64__) || defined(__i386__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

#if !defined(DLP_HAVE_AVX2_KERNELS)
template <typename T>
const KernelTable<T>& avx2_table() {
  return scalar_table<T>();
}
template const KernelTable<float>& avx2_table<float>();
template const KernelTable<double>& avx2_table<double>();
#endif

Isa active_isa() {
  static const Isa isa = [] {
    const char* env = std::getenv("DLP_KERNELS");
    const std::string choice = env ? env : "auto";
    if (choice == "scalar") return Isa::scalar;
    if (choice == "avx2") {
      if (!avx2_supported()) throw ConfigError("DLP_KERNELS=avx2 but the CPU lacks avx2/fma");
      return Isa::avx2;
    }
    if (choice != "auto") throw ConfigError("DLP_KERNELS must be scalar, avx2 or auto");
    return avx2_supported() ? Isa::avx2 : Isa::scalar;
  }();
  return isa;
}

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

template <typename T>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool accumulate) {
  const auto& kt = active<T>();
  for (std::size_t i = 0; i < m; ++i) {
    T* crow = c + i * n;
    if (!accumulate) std::fill(crow, crow + n, T(0));
    for (std::size_t p = 0; p < k; ++p) {
      const T aip = a[i * k + p];
      if (aip != T(0)) kt.axpy(aip, b + p * n, crow, n);
    }
  }
}

template <typename T>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool accumulate) {
  const auto& kt = active<T>();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const T v = kt.dot(a + i * k, b + j * k, k);
      c[i * n + j] = accumulate ? c[i * n + j] + v : v;
    }
  }
}

template <typename T>
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool accumulate) {
  const auto& kt = active<T>();
  if (!accumulate) std::fill(c, c + m * n, T(0));
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t i = 0; i < m; ++i) {
      const T api = a[p * m + i];
      if (api != T(0)) kt.axpy(api, b + p * n, c + i * n, n);
    }
  }
}

template void gemm_nn<float>(std::size_t, std::size_t, std::size_t, const float*, const float*, float*, bool);
template void gemm_nn<double>(std::size_t, std::size_t, std::size_t, const double*, const double*, double*, bool);
template void gemm_nt<float>(std::size_t, std::size_t, std::size_t, const float*, const float*, float*, bool);
template void gemm_nt<double>(std::size_t, std::size_t, std::size_t, const double*, const double*, double*, bool);
template void gemm_tn<float>(std::size_t, std::size_t, std::size_t, const float*, const float*, float*, bool);
template void gemm_tn<double>(std::size_t, std::size_t, std::size_t, const double*, const double*, double*, bool);

}  // namespace dlp::ad::kernels
