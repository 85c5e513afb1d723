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

#include "dlp/diffcore/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dlp/diffcore/kernels.hpp"

namespace dlp::ad {
namespace {

template <typename T>
Tape<T>& tape_of(Var<T> a) {
  if (!a.tape) throw PreconditionError("operation on an unbound variable");
  return *a.tape;
}

template <typename T>
void same_tape(Var<T> a, Var<T> b, const char* op) {
  if (a.tape != b.tape) throw PreconditionError(std::string(op) + ": operands live on different tapes");
}

template <typename T>
Tensor<T> zeros_like(const Tensor<T>& t) {
  return Tensor<T>(t.shape(), std::vector<T>(t.size(), T(0)));
}

enum class Broadcast { same, row, col, scalar };

template <typename T>
Broadcast broadcast_kind(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (a.same_shape(b)) return Broadcast::same;
  if (b.rows() == 1 && b.cols() == 1) return Broadcast::scalar;
  if (b.rows() == 1 && b.cols() == a.cols()) return Broadcast::row;
  if (b.cols() == 1 && b.rows() == a.rows()) return Broadcast::col;
  throw ShapeError(std::string(op) + ": cannot broadcast " + b.shape_string() + " onto " + a.shape_string());
}

inline std::size_t bindex(Broadcast k, std::size_t i, std::size_t j, std::size_t n) {
  switch (k) {
    case Broadcast::same: return i * n + j;
    case Broadcast::row: return j;
    case Broadcast::col: return i;
    case Broadcast::scalar: return 0;
  }
  return 0;
}

// Shared driver for the four broadcasting binaries. `f` computes the value,
// `da`/`db` the partial derivatives given (x, y, out).
template <typename T, typename F, typename DA, typename DB>
Var<T> binary(Var<T> a, Var<T> b, const char* op, F f, DA da, DB db) {
  same_tape(a, b, op);
  Tape<T>& tape = tape_of(a);
  const Tensor<T>& x = a.value();
  const Tensor<T>& y = b.value();
  const Broadcast kind = broadcast_kind(x, y, op);
  const std::size_t m = x.rows(), n = x.cols();
  Tensor<T> out(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = f(x[i * n + j], y[bindex(kind, i, j, n)]);
  const std::size_t ia = a.id, ib = b.id;
  return tape.record(std::move(out), {ia, ib}, [=](Tape<T>& t, std::size_t self) {
    const Tensor<T>& x = t.value(ia);
    const Tensor<T>& y = t.value(ib);
    const Tensor<T>& z = t.value(self);
    const Tensor<T>& g = t.grad(self);
    if (t.needs_grad(ia)) {
      Tensor<T>& gx = t.grad(ia);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const std::size_t k = i * n + j;
          gx[k] += g[k] * da(x[k], y[bindex(kind, i, j, n)], z[k]);
        }
    }
    if (t.needs_grad(ib)) {
      Tensor<T>& gy = t.grad(ib);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const std::size_t k = i * n + j;
          const std::size_t kb = bindex(kind, i, j, n);
          gy[kb] += g[k] * db(x[k], y[kb], z[k]);
        }
    }
  });
}

template <typename T, typename F, typename D>
Var<T> unary(Var<T> a, F f, D d) {
  Tape<T>& tape = tape_of(a);
  const Tensor<T>& x = a.value();
  Tensor<T> out = zeros_like(x);
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = f(x[k]);
  const std::size_t ia = a.id;
  return tape.record(std::move(out), {ia}, [=](Tape<T>& t, std::size_t self) {
    const Tensor<T>& x = t.value(ia);
    const Tensor<T>& y = t.value(self);
    const Tensor<T>& g = t.grad(self);
    Tensor<T>& gx = t.grad(ia);
    for (std::size_t k = 0; k < x.size(); ++k) gx[k] += g[k] * d(x[k], y[k]);
  });
}

template <typename T>
T stable_sigmoid(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

}  // namespace

template <typename T>
Var<T> add(Var<T> a, Var<T> b) {
  if (a.value().same_shape(b.value())) {
    same_tape(a, b, "add");
    const auto& x = a.value();
    Tensor<T> out = zeros_like(x);
    kernels::active<T>().add(x.data(), b.value().data(), out.data(), x.size());
    const std::size_t ia = a.id, ib = b.id;
    return tape_of(a).record(std::move(out), {ia, ib}, [=](Tape<T>& t, std::size_t self) {
      const Tensor<T>& g = t.grad(self);
      for (std::size_t p : {ia, ib}) {
        if (!t.needs_grad(p)) continue;
        Tensor<T>& gp = t.grad(p);
        kernels::active<T>().add(gp.data(), g.data(), gp.data(), g.size());
      }
    });
  }
  return binary(a, b, "add", [](T x, T y) { return x + y; }, [](T, T, T) { return T(1); },
                [](T, T, T) { return T(1); });
}

template <typename T>
Var<T> sub(Var<T> a, Var<T> b) {
  return binary(a, b, "sub", [](T x, T y) { return x - y; }, [](T, T, T) { return T(1); },
                [](T, T, T) { return T(-1); });
}

template <typename T>
Var<T> mul(Var<T> a, Var<T> b) {
  return binary(a, b, "mul", [](T x, T y) { return x * y; }, [](T, T y, T) { return y; },
                [](T x, T, T) { return x; });
}

template <typename T>
Var<T> div(Var<T> a, Var<T> b) {
  for (T v : b.value().values()) {
    if (v == T(0)) throw DomainError("div: division by zero");
  }
  return binary(a, b, "div", [](T x, T y) { return x / y; }, [](T, T y, T) { return T(1) / y; },
                [](T x, T y, T) { return -x / (y * y); });
}

template <typename T>
Var<T> affine(Var<T> a, T scale, T shift) {
  return unary(a, [=](T x) { return scale * x + shift; }, [=](T, T) { return scale; });
}

template <typename T>
Var<T> matmul(Var<T> a, Var<T> b) {
  same_tape(a, b, "matmul");
  const Tensor<T>& x = a.value();
  const Tensor<T>& y = b.value();
  if (x.cols() != y.rows()) {
    throw ShapeError("matmul: " + x.shape_string() + " x " + y.shape_string());
  }
  const std::size_t m = x.rows(), k = x.cols(), n = y.cols();
  Tensor<T> out(m, n);
  kernels::gemm_nn(m, n, k, x.data(), y.data(), out.data(), false);
  const std::size_t ia = a.id, ib = b.id;
  return tape_of(a).record(std::move(out), {ia, ib}, [=](Tape<T>& t, std::size_t self) {
    const Tensor<T>& g = t.grad(self);
    if (t.needs_grad(ia)) kernels::gemm_nt(m, k, n, g.data(), t.value(ib).data(), t.grad(ia).data(), true);
    if (t.needs_grad(ib)) kernels::gemm_tn(k, n, m, t.value(ia).data(), g.data(), t.grad(ib).data(), true);
  });
}

template <typename T>
Var<T> transpose(Var<T> a) {
  const Tensor<T>& x = a.value();
  const std::size_t m = x.rows(), n = x.cols();
  Tensor<T> out(n, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out(j, i) = x(i, j);
  const std::size_t ia = a.id;
  return tape_of(a).record(std::move(out), {ia}, [=](Tape<T>& t, std::size_t self) {
    const Tensor<T>& g = t.grad(self);
    Tensor<T>& gx = t.grad(ia);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) gx(i, j) += g(j, i);
  });
}

template <typename T>
Var<T> concat_cols(std::span<const Var<T>> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const std::size_t m = parts[0].rows();
  std::size_t n = 0;
  std::vector<std::size_t> ids, offsets;
  for (const auto& p : parts) {
    same_tape(parts[0], p, "concat_cols");
    if (p.rows() != m) throw ShapeError("concat_cols: row counts differ");
    ids.push_back(p.id);
    offsets.push_back(n);
    n += p.cols();
  }
  Tensor<T> out(m, n);
  for (std::size_t q = 0; q < parts.size(); ++q) {
    const Tensor<T>& x = parts[q].value();
    for (std::size_t i = 0; i < m; ++i)
      std::copy_n(x.data() + i * x.cols(), x.cols(), out.data() + i * n + offsets[q]);
  }
  return tape_of(parts[0]).record(std::move(out), ids, [=](Tape<T>& t, std::size_t self) {
    const Tensor<T>& g = t.grad(self);
    for (std::size_t q = 0; q < ids.size(); ++q) {
      if (!t.needs_grad(ids[q])) continue;
      Tensor<T>& gx = t.grad(ids[q]);
      const std::size_t w = gx.cols();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < w; ++j) gx[i * w + j] += g[i * n + offsets[q] + j];
    }
  });
}

template <typename T>
Var<T> concat_rows(std::span<const Var<T>> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const std::size_t n = parts[0].cols();
  std::size_t m = 0;
  std::vector<std::size_t> ids, offsets;
  for (const auto& p : parts) {
    same_tape(parts[0], p, "concat_rows");
    if (p.cols() != n) throw ShapeError("concat_rows: column counts differ");
    ids.push_back(p.id);
    offsets.push_back(m);
    m += p.rows();
  }
  Tensor<T> out(m, n);
  for (std::size_t q = 0; q < parts.size(); ++q) {
    const Tensor<T>& x = parts[q].value();
    std::copy_n(x.data(), x.size(), out.data() + offsets[q] * n);
  }
  return tape_of(parts[0]).record(std::move(out), ids, [=](Tape<T>& t, std::size_t self) {
    const Tensor<T>& g = t.grad(self);
    for (std::size_t q = 0; q < ids.size(); ++q) {
      if (!t.needs_grad(ids[q])) continue;
      Tensor<T>& gx = t.grad(ids[q]);
      for (std::size_t k = 0; k < gx.size(); ++k) gx[k] += g[offsets[q] * n + k];
    }
  });
}

template <typename T>
Var<T> sum(Var<T> a, Axis axis) {
  const Tensor<T>& x = a.value();
  const std::size_t m = x.rows(), n = x.cols();
  const auto& kt = kernels::active<T>();
  Tensor<T> out = axis == Axis::rows ? Tensor<T>(1, n) : Tensor<T>(m, 1);
  if (axis == Axis::rows) {
    for (std::size_t i = 0; i < m; ++i) kt.add(out.data(), x.data() + i * n, out.data(), n);
  } else {
    for (std::size_t i = 0; i < m; ++i) out[i] = kt.sum(x.data() + i * n, n);
  }
  const std::size_t ia = a.id;
  return tape_of(a).record(std::move(out), {ia}, [=](Tape<T>& t, std::size_t self) {
    const Tensor<T>& g = t.grad(self);
    Tensor<T>& gx = t.grad(ia);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) gx[i * n + j] += axis == Axis::rows ? g[j] : g[i];
  });
}

template <typename T>
Var<T> sum_all(Var<T> a) {
  const Tensor<T>& x = a.value();
  Tensor<T> out = Tensor<T>::scalar(kernels::active<T>().sum(x.data(), x.size()));
  const std::size_t ia = a.id;
  return tape_of(a).record(std::move(out), {ia}, [=](Tape<T>& t, std::size_t self) {
    const T g = t.grad(self)[0];
    for (auto& v : t.grad(ia).values()) v += g;
  });
}

template <typename T>
Var<T> mean(Var<T> a, Axis axis) {
  const T count = static_cast<T>(axis == Axis::rows ? a.rows() : a.cols());
  if (count == T(0)) throw ShapeError("mean: empty axis");
  return affine(sum(a, axis), T(1) / count, T(0));
}

template <typename T>
Var<T> mean_all(Var<T> a) {
  if (a.value().size() == 0) throw ShapeError("mean_all: empty tensor");
  return affine(sum_all(a), T(1) / static_cast<T>(a.value().size()), T(0));
}

template <typename T>
Var<T> sigmoid(Var<T> a) {
  return unary(a, [](T x) { return stable_sigmoid(x); }, [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Var<T> relu(Var<T> a) {
  return unary(a, [](T x) { return x < T(0) ? T(0) : x; }, [](T x, T) { return x > T(0) ? T(1) : T(0); });
}

template <typename T>
Var<T> log(Var<T> a) {
  for (T v : a.value().values()) {
    if (!(v > T(0))) throw DomainError("log: non-positive input");
  }
  return unary(a, [](T x) { return std::log(x); }, [](T x, T) { return T(1) / x; });
}

template <typename T>
Var<T> exp(Var<T> a) {
  return unary(a, [](T x) { return std::exp(x); }, [](T, T y) { return y; });
}

template <typename T>
Var<T> cos(Var<T> a) {
  return unary(a, [](T x) { return std::cos(x); }, [](T x, T) { return -std::sin(x); });
}

template <typename T>
Var<T> sin(Var<T> a) {
  return unary(a, [](T x) { return std::sin(x); }, [](T x, T) { return std::cos(x); });
}

template <typename T>
Var<T> power(Var<T> a, T exponent) {
  const bool positive_integer = exponent > T(0) && std::floor(exponent) == exponent;
  if (!positive_integer) {
    for (T v : a.value().values()) {
      if (!(v > T(0))) throw DomainError("power: non-positive base with non-integer or negative exponent");
    }
  }
  return unary(a, [=](T x) { return std::pow(x, exponent); },
               [=](T x, T) { return exponent * std::pow(x, exponent - T(1)); });
}

template <typename T>
Var<T> clamp(Var<T> a, T lo, T hi) {
  return unary(a, [=](T x) { return std::clamp(x, lo, hi); },
               [=](T x, T) { return (x >= lo && x <= hi) ? T(1) : T(0); });
}

template <typename T>
Var<T> softmax_cross_entropy(Var<T> logits, std::span<const std::size_t> targets) {
  const Tensor<T>& x = logits.value();
  const std::size_t m = x.rows(), c = x.cols();
  if (targets.size() != m) throw ShapeError("softmax_cross_entropy: one target per row required");
  if (m == 0 || c == 0) throw ShapeError("softmax_cross_entropy: empty logits");
  Tensor<T> probs(m, c);
  T total = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (targets[i] >= c) throw ShapeError("softmax_cross_entropy: target out of range");
    const T* row = x.data() + i * c;
    const T mx = *std::max_element(row, row + c);
    T z = 0;
    for (std::size_t j = 0; j < c; ++j) z += std::exp(row[j] - mx);
    const T lse = mx + std::log(z);
    for (std::size_t j = 0; j < c; ++j) probs(i, j) = std::exp(row[j] - lse);
    total += lse - row[targets[i]];
  }
  std::vector<std::size_t> tgt(targets.begin(), targets.end());
  const std::size_t ia = logits.id;
  return tape_of(logits).record(
      Tensor<T>::scalar(total / static_cast<T>(m)), {ia},
      [=, probs = std::move(probs)](Tape<T>& t, std::size_t self) {
        const T g = t.grad(self)[0] / static_cast<T>(m);
        Tensor<T>& gx = t.grad(ia);
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < c; ++j)
            gx(i, j) += g * (probs(i, j) - (j == tgt[i] ? T(1) : T(0)));
      });
}

template <typename T>
Var<T> l2norm(Var<T> a, Axis axis) {
  const Tensor<T>& x = a.value();
  const std::size_t m = x.rows(), n = x.cols();
  Tensor<T> out = axis == Axis::rows ? Tensor<T>(1, n) : Tensor<T>(m, 1);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[axis == Axis::rows ? j : i] += x(i, j) * x(i, j);
  for (auto& v : out.values()) v = std::sqrt(v);
  const std::size_t ia = a.id;
  return tape_of(a).record(std::move(out), {ia}, [=](Tape<T>& t, std::size_t self) {
    const Tensor<T>& x = t.value(ia);
    const Tensor<T>& y = t.value(self);
    const Tensor<T>& g = t.grad(self);
    Tensor<T>& gx = t.grad(ia);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t k = axis == Axis::rows ? j : i;
        if (y[k] > T(0)) gx(i, j) += g[k] * x(i, j) / y[k];
      }
  });
}

template <typename T>
Var<T> cosine(Var<T> a, Var<T> b) {
  same_tape(a, b, "cosine");
  const Tensor<T>& x = a.value();
  const Tensor<T>& y = b.value();
  if (!x.same_shape(y)) throw ShapeError("cosine: " + x.shape_string() + " vs " + y.shape_string());
  const std::size_t m = x.rows(), n = x.cols();
  const auto& kt = kernels::active<T>();
  Tensor<T> out(m, 1);
  std::vector<T> na(m), nb(m);
  for (std::size_t i = 0; i < m; ++i) {
    const T* xi = x.data() + i * n;
    const T* yi = y.data() + i * n;
    na[i] = std::sqrt(kt.dot(xi, xi, n));
    nb[i] = std::sqrt(kt.dot(yi, yi, n));
    if (na[i] == T(0) || nb[i] == T(0)) throw DomainError("cosine: zero-norm input row");
    out[i] = kt.dot(xi, yi, n) / (na[i] * nb[i]);
  }
  const std::size_t ia = a.id, ib = b.id;
  return tape_of(a).record(std::move(out), {ia, ib}, [=](Tape<T>& t, std::size_t self) {
    const Tensor<T>& x = t.value(ia);
    const Tensor<T>& y = t.value(ib);
    const Tensor<T>& c = t.value(self);
    const Tensor<T>& g = t.grad(self);
    for (std::size_t i = 0; i < m; ++i) {
      const T inv = T(1) / (na[i] * nb[i]);
      if (t.needs_grad(ia)) {
        Tensor<T>& gx = t.grad(ia);
        for (std::size_t j = 0; j < n; ++j)
          gx(i, j) += g[i] * (y(i, j) * inv - c[i] * x(i, j) / (na[i] * na[i]));
      }
      if (t.needs_grad(ib)) {
        Tensor<T>& gy = t.grad(ib);
        for (std::size_t j = 0; j < n; ++j)
          gy(i, j) += g[i] * (x(i, j) * inv - c[i] * y(i, j) / (nb[i] * nb[i]));
      }
    }
  });
}

template <typename T>
Var<T> gather_rows(Var<T> a, std::span<const std::size_t> index) {
  const Tensor<T>& x = a.value();
  const std::size_t n = x.cols();
  Tensor<T> out(index.size(), n);
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= x.rows()) throw ShapeError("gather_rows: index out of range");
    std::copy_n(x.data() + index[i] * n, n, out.data() + i * n);
  }
  std::vector<std::size_t> idx(index.begin(), index.end());
  const std::size_t ia = a.id;
  return tape_of(a).record(std::move(out), {ia}, [=](Tape<T>& t, std::size_t self) {
    const Tensor<T>& g = t.grad(self);
    Tensor<T>& gx = t.grad(ia);
    const auto& kt = kernels::active<T>();
    for (std::size_t i = 0; i < idx.size(); ++i)
      kt.add(gx.data() + idx[i] * n, g.data() + i * n, gx.data() + idx[i] * n, n);
  });
}

template <typename T>
Var<T> gather_cols(Var<T> a, std::span<const std::size_t> index) {
  const Tensor<T>& x = a.value();
  const std::size_t m = x.rows(), n = x.cols(), w = index.size();
  for (auto j : index) {
    if (j >= n) throw ShapeError("gather_cols: index out of range");
  }
  Tensor<T> out(m, w);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < w; ++j) out(i, j) = x(i, index[j]);
  std::vector<std::size_t> idx(index.begin(), index.end());
  const std::size_t ia = a.id;
  return tape_of(a).record(std::move(out), {ia}, [=](Tape<T>& t, std::size_t self) {
    const Tensor<T>& g = t.grad(self);
    Tensor<T>& gx = t.grad(ia);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < w; ++j) gx(i, idx[j]) += g(i, j);
  });
}

template <typename T>
Var<T> scatter_add_rows(Var<T> a, std::span<const std::size_t> index, std::size_t rows) {
  const Tensor<T>& x = a.value();
  if (index.size() != x.rows()) throw ShapeError("scatter_add_rows: one index per input row required");
  const std::size_t n = x.cols();
  const auto& kt = kernels::active<T>();
  Tensor<T> out(rows, n);
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= rows) throw ShapeError("scatter_add_rows: index out of range");
    kt.add(out.data() + index[i] * n, x.data() + i * n, out.data() + index[i] * n, n);
  }
  std::vector<std::size_t> idx(index.begin(), index.end());
  const std::size_t ia = a.id;
  return tape_of(a).record(std::move(out), {ia}, [=](Tape<T>& t, std::size_t self) {
    const Tensor<T>& g = t.grad(self);
    Tensor<T>& gx = t.grad(ia);
    const auto& kt = kernels::active<T>();
    for (std::size_t i = 0; i < idx.size(); ++i)
      kt.add(gx.data() + i * n, g.data() + idx[i] * n, gx.data() + i * n, n);
  });
}

template <typename T>
Var<T> scatter_elements(Var<T> values, std::span<const ElementRef> refs, std::size_t rows, std::size_t cols) {
  const Tensor<T>& v = values.value();
  Tensor<T> out(rows, cols);
  for (const auto& r : refs) {
    if (r.row >= rows || r.col >= cols || r.src >= v.size()) {
      throw ShapeError("scatter_elements: reference out of range");
    }
    out(r.row, r.col) += v[r.src];
  }
  std::vector<ElementRef> saved(refs.begin(), refs.end());
  const std::size_t ia = values.id;
  return tape_of(values).record(std::move(out), {ia}, [=](Tape<T>& t, std::size_t self) {
    const Tensor<T>& g = t.grad(self);
    Tensor<T>& gv = t.grad(ia);
    for (const auto& r : saved) gv[r.src] += g(r.row, r.col);
  });
}

#define DLP_INSTANTIATE_OPS(T)                                                                 \
  template Var<T> add(Var<T>, Var<T>);                                                         \
  template Var<T> sub(Var<T>, Var<T>);                                                         \
  template Var<T> mul(Var<T>, Var<T>);                                                         \
  template Var<T> div(Var<T>, Var<T>);                                                         \
  template Var<T> affine(Var<T>, T, T);                                                        \
  template Var<T> matmul(Var<T>, Var<T>);                                                      \
  template Var<T> transpose(Var<T>);                                                           \
  template Var<T> concat_cols(std::span<const Var<T>>);                                        \
  template Var<T> concat_rows(std::span<const Var<T>>);                                        \
  template Var<T> sum(Var<T>, Axis);                                                           \
  template Var<T> sum_all(Var<T>);                                                             \
  template Var<T> mean(Var<T>, Axis);                                                          \
  template Var<T> mean_all(Var<T>);                                                            \
  template Var<T> sigmoid(Var<T>);                                                             \
  template Var<T> relu(Var<T>);                                                                \
  template Var<T> log(Var<T>);                                                                 \
  template Var<T> exp(Var<T>);                                                                 \
  template Var<T> cos(Var<T>);                                                                 \
  template Var<T> sin(Var<T>);                                                                 \
  template Var<T> power(Var<T>, T);                                                            \
  template Var<T> clamp(Var<T>, T, T);                                                         \
  template Var<T> softmax_cross_entropy(Var<T>, std::span<const std::size_t>);                 \
  template Var<T> l2norm(Var<T>, Axis);                                                        \
  template Var<T> cosine(Var<T>, Var<T>);                                                      \
  template Var<T> gather_rows(Var<T>, std::span<const std::size_t>);                           \
  template Var<T> gather_cols(Var<T>, std::span<const std::size_t>);                           \
  template Var<T> scatter_add_rows(Var<T>, std::span<const std::size_t>, std::size_t);         \
  template Var<T> scatter_elements(Var<T>, std::span<const ElementRef>, std::size_t, std::size_t);

DLP_INSTANTIATE_OPS(float)
DLP_INSTANTIATE_OPS(double)

}  // namespace dlp::ad
