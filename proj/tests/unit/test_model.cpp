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
#include <cmath>
#include <deque>
#include <numeric>
#include <set>
#include <sstream>

#include "doctest.h"
#include "dlp/common/error.hpp"
#include "dlp/common/rng.hpp"
#include "dlp/diffcore/grad_check.hpp"
#include "dlp/model/denoised_lp.hpp"
#include "test_support.hpp"

using namespace dlp;
using namespace dlp::model;
using dlp::testing::random_graph;

namespace {

using Mat = std::vector<std::vector<double>>;

Mat to_mat(const Tensor<double>& t) {
  Mat m(t.rows(), std::vector<double>(t.cols()));
  for (std::size_t i = 0; i < t.rows(); ++i)
    for (std::size_t j = 0; j < t.cols(); ++j) m[i][j] = t(i, j);
  return m;
}

Mat mm(const Mat& a, const Mat& b) {
  Mat c(a.size(), std::vector<double>(b[0].size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k)
      for (std::size_t j = 0; j < b[0].size(); ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

// mean over rows of relu(h W + b)
std::vector<double> readout(const Mat& h, const Mat& w, const Mat& b) {
  const Mat z = mm(h, w);
  std::vector<double> out(w[0].size(), 0.0);
  for (const auto& row : z)
    for (std::size_t j = 0; j < row.size(); ++j) out[j] += std::max(0.0, row[j] + b[0][j]) / z.size();
  return out;
}

Tensor<double> random_tensor(Rng& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  Tensor<double> t(r, c);
  for (auto& v : t.values()) v = rng.uniform(-scale, scale);
  return t;
}

Parameter<double> param(const std::string& name, Tensor<double> v) { return Parameter<double>(name, std::move(v)); }

double max_abs_diff(const Tensor<double>& a, const std::vector<double>& b) {
  double worst = 0;
  for (std::size_t i = 0; i < b.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

std::vector<sub::NodePair> all_pairs(std::uint32_t n) {
  std::vector<sub::NodePair> p;
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = i + 1; j < n; ++j) p.emplace_back(i, j);
  return p;
}

}  // namespace

TEST_CASE("project_nodes examples and gradient") {
  Rng rng(1);
  Tape<double> tape;
  auto x = tape.constant(random_tensor(rng, 4, 3));
  auto w0 = param("w0", Tensor<double>(3, 3)), b0 = param("b0", Tensor<double>::row({0.1, 0.2, 0.3}));
  auto w1 = param("w1", Tensor<double>(3, 2)), b1 = param("b1", Tensor<double>::row({0.5, -0.5}));
  ProjectionParams<double> p{&w0, &b0, &w1, &b1, Activation::relu};
  const auto z = project_nodes(x, p).value();
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(z(i, 0) == 0.5);
    CHECK(z(i, 1) == -0.5);
  }

  auto e0 = param("e0", Tensor<double>::matrix(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1}));
  auto e1 = param("e1", Tensor<double>::matrix(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1}));
  auto zb0 = param("zb0", Tensor<double>(1, 3)), zb1 = param("zb1", Tensor<double>(1, 3));
  ProjectionParams<double> id{&e0, &zb0, &e1, &zb1, Activation::identity};
  CHECK(project_nodes(x, id).value() == x.value());

  auto r0 = param("r0", random_tensor(rng, 3, 5)), rb0 = param("rb0", random_tensor(rng, 1, 5));
  auto r1 = param("r1", random_tensor(rng, 5, 2)), rb1 = param("rb1", random_tensor(rng, 1, 2));
  ProjectionParams<double> rp{&r0, &rb0, &r1, &rb1, Activation::relu};
  const auto xv = random_tensor(rng, 4, 3);
  Parameter<double>* ps[] = {&r0, &rb0, &r1, &rb1};
  const auto report = ad::grad_check(
      [&](Tape<double>& t) {
        auto zz = project_nodes(t.constant(xv), rp);
        return ad::sum_all(ad::mul(zz, zz));
      },
      ps);
  CHECK(report.max_rel_error < 1e-4);

  auto bad = param("bad", Tensor<double>(2, 3));
  ProjectionParams<double> wrong{&bad, &zb0, &e1, &zb1, Activation::relu};
  CHECK_THROWS_AS(project_nodes(x, wrong), ShapeError);
}

TEST_CASE("reliability examples") {
  Tape<double> tape;
  const sub::NodePair pair[] = {{0, 1}};
  EstimatorParams<double> mlp{EstimatorKind::mlp};
  auto orth = tape.constant(Tensor<double>::matrix(2, 2, {1, 0, 0, 1}));
  CHECK(reliability(orth, orth, std::span(pair), mlp).value().item() == doctest::Approx(0.5).epsilon(1e-15));
  auto ln3 = tape.constant(Tensor<double>::matrix(2, 1, {1, std::log(3.0)}));
  CHECK(reliability(ln3, ln3, std::span(pair), mlp).value().item() == doctest::Approx(0.75).epsilon(1e-12));

  EstimatorParams<double> cos{EstimatorKind::cosine};
  auto same = tape.constant(Tensor<double>::matrix(2, 3, {0.3, -1, 2, 0.3, -1, 2}));
  CHECK(reliability(same, same, std::span(pair), cos).value().item() == doctest::Approx(1.0).epsilon(1e-12));
  auto zero = tape.constant(Tensor<double>::matrix(2, 2, {0, 0, 1, 1}));
  CHECK_THROWS_AS(reliability(zero, zero, std::span(pair), cos), DomainError);
  auto w = param("w", Tensor<double>::row({1, 1}));
  EstimatorParams<double> wcos{EstimatorKind::weighted_cosine, nullptr, &w};
  CHECK_THROWS_AS(reliability(zero, zero, std::span(pair), wcos), DomainError);
}

TEST_CASE("reliability range and cosine symmetry") {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    Tape<double> tape;
    auto z = tape.constant(random_tensor(rng, 6, 4, 3.0));
    auto x = tape.constant(random_tensor(rng, 6, 5, 3.0));
    auto a = param("a", random_tensor(rng, 8, 1, 2.0));
    auto w = param("w", random_tensor(rng, 1, 4, 2.0));
    const auto forward = all_pairs(6);
    std::vector<sub::NodePair> backward;
    for (auto [i, j] : forward) backward.emplace_back(j, i);
    for (auto kind : {EstimatorKind::attention, EstimatorKind::mlp, EstimatorKind::weighted_cosine,
                      EstimatorKind::cosine}) {
      EstimatorParams<double> p{kind, &a, &w};
      const auto pf = reliability(z, x, std::span<const sub::NodePair>(forward), p).value();
      for (double v : pf.values()) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
      if (kind == EstimatorKind::weighted_cosine || kind == EstimatorKind::cosine) {
        const auto pb = reliability(z, x, std::span<const sub::NodePair>(backward), p).value();
        CHECK(pf == pb);
      }
    }
  }
}

TEST_CASE("concrete_relax values, identity and monotonicity") {
  CHECK(concrete_relax(0.5, 0.5, 0.3) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(concrete_relax(0.5, 0.5, 7.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(concrete_relax(0.8, 0.5, 1.0) == doctest::Approx(0.8).epsilon(1e-12));
  const double expect = 1.0 / (1.0 + std::exp(-2.0 * std::log(4.0 / 3.0)));
  CHECK(std::abs(concrete_relax(0.8, 0.25, 0.5) - expect) < 1e-12);
  CHECK(concrete_relax(0.8, 0.25, 0.5) == doctest::Approx(0.6400).epsilon(1e-4));
  for (int k = 1; k <= 9; ++k) CHECK(std::abs(concrete_relax(k / 10.0, 0.5, 1.0) - k / 10.0) < 1e-12);
  for (double eps : {0.05, 0.3, 0.5, 0.9}) {
    for (double t : {0.2, 1.0, 3.0}) {
      double prev = -1;
      for (int k = 1; k < 100; ++k) {
        const double v = concrete_relax(k / 100.0, eps, t);
        CHECK(v > prev);
        prev = v;
      }
    }
  }
  CHECK(concrete_relax(0.0, 0.5, 1.0) == doctest::Approx(1e-6));
  CHECK(concrete_relax(1.0, 0.5, 1.0) == doctest::Approx(1 - 1e-6));

  Tape<double> tape;
  auto pi = tape.constant(Tensor<double>::matrix(3, 1, {0.8, 0.5, 0.2}));
  const auto eps = Tensor<double>::matrix(3, 1, {0.25, 0.5, 0.7});
  const auto out = concrete_relax(pi, eps, 0.5).value();
  CHECK(std::abs(out[0] - expect) < 1e-12);
  CHECK(std::abs(out[1] - 0.5) < 1e-12);
  CHECK(std::abs(out[2] - concrete_relax(0.2, 0.7, 0.5)) < 1e-12);
  for (double v : out.values()) CHECK((v > 0 && v < 1));
  CHECK_THROWS_AS(concrete_relax(pi, Tensor<double>::matrix(3, 1, {0, 0.5, 0.5}), 1.0), DomainError);
  CHECK_THROWS_AS(concrete_relax(pi, eps, 0.0), PreconditionError);
}

TEST_CASE("open_unit keeps single-precision noise inside (0, 1)") {
  const double near_one = 1.0 - 1e-10;
  CHECK(static_cast<float>(near_one) == 1.0f);
  CHECK(open_unit<float>(near_one) < 1.0f);
  CHECK(open_unit<float>(near_one) > 0.99f);
  CHECK(open_unit<double>(near_one) == near_one);
  CHECK(open_unit<float>(1e-30) > 0.0f);
  Tape<float> tape;
  auto pi = tape.constant(Tensor<float>::row({0.2f, 0.9f}));
  const Tensor<float> eps = Tensor<float>::row({open_unit<float>(near_one), open_unit<float>(2e-16)});
  for (float w : concrete_relax(pi, eps, 1.0f).value().values()) CHECK(std::isfinite(w));
}

TEST_CASE("concrete_relax gradient matches finite differences") {
  Rng rng(4);
  auto logits = param("l", random_tensor(rng, 5, 1, 2.0));
  const auto eps = Tensor<double>::matrix(5, 1, {0.1, 0.3, 0.5, 0.7, 0.9});
  Parameter<double>* ps[] = {&logits};
  const auto r = ad::grad_check(
      [&](Tape<double>& t) { return ad::sum_all(concrete_relax(ad::sigmoid(t.leaf(logits)), eps, 0.7)); }, ps);
  CHECK(r.max_rel_error < 1e-6);
}

TEST_CASE("refine keeps pairs at or above one half") {
  Tape<double> tape;
  const auto pairs = all_pairs(3);
  auto low = tape.constant(Tensor<double>::matrix(3, 1, {0.1, 0.49, 0.3}));
  auto only_self = refine(3, std::span<const sub::NodePair>(pairs), low);
  CHECK(only_self.kept.empty());
  CHECK(only_self.adjacency.value() == Tensor<double>::matrix(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1}));

  auto edge = tape.constant(Tensor<double>::matrix(3, 1, {0.49, 0.5, 0.51}));
  auto r = refine(3, std::span<const sub::NodePair>(pairs), edge);
  CHECK(r.kept == std::vector<sub::NodePair>{pairs[1], pairs[2]});
  CHECK(r.adjacency.value() == Tensor<double>::matrix(3, 3, {1, 0, 0.5, 0, 1, 0.51, 0.5, 0.51, 1}));

  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = static_cast<std::uint32_t>(2 + rng.below(10));
    const auto ps = all_pairs(n);
    Tensor<double> w(ps.size(), 1);
    for (auto& v : w.values()) v = rng.below(4) == 0 ? 0.5 : rng.uniform();
    auto kept = refine(n, std::span<const sub::NodePair>(ps), tape.constant(w)).kept;
    std::vector<sub::NodePair> expect;
    for (std::size_t k = 0; k < ps.size(); ++k)
      if (w[k] >= 0.5) expect.push_back(ps[k]);
    CHECK(kept == expect);
  }
}

TEST_CASE("gcn_readout matches dense algebra and pooling symmetry") {
  Rng rng(11);
  const std::size_t n = 5, f = 3, h = 4;
  Tensor<double> a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.coin()) a(i, j) = a(j, i) = rng.uniform(0.5, 1.0);
  }
  const auto x = random_tensor(rng, n, f);
  auto w0 = param("g0", random_tensor(rng, f, h)), w1 = param("g1", random_tensor(rng, h, h));
  auto fw = param("fw", random_tensor(rng, h, h)), fb = param("fb", random_tensor(rng, 1, h, 0.2));
  Parameter<double>* layers[] = {&w0, &w1};

  Tape<double> tape;
  auto a_hat = normalize_adjacency(tape.constant(a));
  const auto got = gcn_readout(a_hat, tape.constant(x), std::span<Parameter<double>* const>(layers), fw, fb).value();

  Mat am = to_mat(a), norm(n, std::vector<double>(n));
  std::vector<double> deg(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) deg[i] += am[i][j];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) norm[i][j] = am[i][j] / std::sqrt(deg[i] * deg[j]);
  CHECK(max_abs_diff(a_hat.value(), [&] {
          std::vector<double> flat;
          for (auto& row : norm) flat.insert(flat.end(), row.begin(), row.end());
          return flat;
        }()) < 1e-12);
  Mat hid = mm(norm, mm(to_mat(x), to_mat(w0.value)));
  for (auto& row : hid)
    for (auto& v : row) v = std::max(0.0, v);
  const Mat out = mm(norm, mm(hid, to_mat(w1.value)));
  CHECK(max_abs_diff(got, readout(out, to_mat(fw.value), to_mat(fb.value))) < 1e-9);

  auto f0 = param("f0", random_tensor(rng, f, h));
  const auto none = gcn_readout(a_hat, tape.constant(x), std::span<Parameter<double>* const>(), f0, fb).value();
  CHECK(max_abs_diff(none, readout(to_mat(x), to_mat(f0.value), to_mat(fb.value))) < 1e-12);

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int trial = 0; trial < 10; ++trial) {
    rng.shuffle(std::span(perm));
    Tensor<double> ap(n, n), xp(n, f);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) ap(i, j) = a(perm[i], perm[j]);
      for (std::size_t c = 0; c < f; ++c) xp(i, c) = x(perm[i], c);
    }
    Tape<double> t2;
    const auto permuted = gcn_readout(normalize_adjacency(t2.constant(ap)), t2.constant(xp),
                                      std::span<Parameter<double>* const>(layers), fw, fb).value();
    for (std::size_t c = 0; c < h; ++c) CHECK(std::abs(permuted[c] - got[c]) < 1e-9);
  }
}

namespace {

// Row convention: out_i = x_i W0 + sum over edges (j, r, i) of a (x_j - e_r) W_r,
// a = sigmoid([x_i, x_j, e_r] . W1).
Mat rgnn_oracle(const Mat& x, const Mat& e, const std::vector<sub::SemanticEdge>& edges, const std::vector<Mat>& wr,
                const Mat& w1, const Mat* w0) {
  const std::size_t in = x[0].size(), h = wr[0][0].size();
  Mat out = w0 ? mm(x, *w0) : Mat(x.size(), std::vector<double>(h, 0.0));
  for (const auto& edge : edges) {
    const auto& xi = x[edge.tail];
    const auto& xj = x[edge.head];
    const auto& er = e[edge.relation.index()];
    double s = 0;
    for (std::size_t c = 0; c < in; ++c) s += xi[c] * w1[c][0] + xj[c] * w1[in + c][0] + er[c] * w1[2 * in + c][0];
    const double alpha = 1.0 / (1.0 + std::exp(-s));
    for (std::size_t k = 0; k < h; ++k) {
      double m = 0;
      for (std::size_t c = 0; c < in; ++c) m += (xj[c] - er[c]) * wr[edge.relation.index()][c][k];
      out[edge.tail][k] += alpha * m;
    }
  }
  return out;
}

struct RgnnFixture {
  std::size_t n = 4, in = 3, h = 3, relations = 2;
  std::deque<Parameter<double>> store;
  std::vector<RgnnLayerParams<double>> layers;
  Tensor<double> x, e;
  std::vector<sub::SemanticEdge> edges;

  RgnnFixture(std::uint64_t seed, std::size_t depth, bool self_term) {
    Rng rng(seed);
    x = random_tensor(rng, n, in);
    e = random_tensor(rng, relations, in);
    for (std::size_t l = 0; l < depth; ++l) {
      const std::size_t width = l == 0 ? in : h;
      RgnnLayerParams<double> p;
      for (std::size_t r = 0; r < relations; ++r) p.relation.push_back(&store.emplace_back("wr", random_tensor(rng, width, h)));
      p.gate = &store.emplace_back("w1", random_tensor(rng, 3 * width, 1));
      if (self_term) p.self = &store.emplace_back("w0", random_tensor(rng, width, h));
      p.relation_update = &store.emplace_back("wrel", random_tensor(rng, width, h));
      layers.push_back(p);
    }
    edges = {{0, RelationId(0), 1}, {2, RelationId(1), 1}, {1, RelationId(0), 3}, {3, RelationId(1), 0},
             {2, RelationId(0), 0}};
  }
};

std::vector<double> flat(const Mat& m) {
  std::vector<double> out;
  for (const auto& row : m) out.insert(out.end(), row.begin(), row.end());
  return out;
}

}  // namespace

TEST_CASE("rgnn_layer examples") {
  Tape<double> tape;
  auto x = tape.constant(Tensor<double>::matrix(2, 2, {1, 2, 3, 5}));
  auto e = tape.constant(Tensor<double>::matrix(1, 2, {0.5, 1}));
  auto wr = param("wr", Tensor<double>::matrix(2, 2, {1, 0, 0, 1}));
  auto w1 = param("w1", Tensor<double>(6, 1));
  auto wrel = param("wrel", Tensor<double>::matrix(2, 2, {1, 0, 0, 1}));
  RgnnLayerParams<double> p{{&wr}, &w1, nullptr, &wrel};
  const sub::SemanticEdge one[] = {{1, RelationId(0), 0}};
  const auto out = rgnn_layer(x, e, std::span(one), p).value();
  CHECK(out(0, 0) == doctest::Approx(0.5 * (3 - 0.5)));
  CHECK(out(0, 1) == doctest::Approx(0.5 * (5 - 1)));
  CHECK(out(1, 0) == 0.0);
  CHECK(out(1, 1) == 0.0);
  CHECK(rgnn_layer(x, e, std::span<const sub::SemanticEdge>(), p).value() == Tensor<double>(2, 2));
  const sub::SemanticEdge unknown[] = {{1, RelationId(4), 0}};
  CHECK_THROWS_AS(rgnn_layer(x, e, std::span(unknown), p), LookupError);
}

TEST_CASE("rgnn_layer matches a direct double sum") {
  for (bool self_term : {false, true}) {
    RgnnFixture fx(31, 1, self_term);
    Tape<double> tape;
    const auto got = rgnn_layer(tape.constant(fx.x), tape.constant(fx.e), std::span(fx.edges), fx.layers[0]).value();
    std::vector<Mat> wr;
    for (auto* w : fx.layers[0].relation) wr.push_back(to_mat(w->value));
    const Mat w0 = self_term ? to_mat(fx.layers[0].self->value) : Mat();
    const auto expect = rgnn_oracle(to_mat(fx.x), to_mat(fx.e), fx.edges, wr, to_mat(fx.layers[0].gate->value),
                                    self_term ? &w0 : nullptr);
    CHECK(max_abs_diff(got, flat(expect)) < 1e-9);
  }
}

TEST_CASE("rgnn_readout self chain, direct evaluation and permutation invariance") {
  RgnnFixture fx(32, 2, true);
  Rng rng(33);
  auto fw = param("fw", random_tensor(rng, fx.h, fx.h)), fb = param("fb", random_tensor(rng, 1, fx.h, 0.1));
  Tape<double> tape;
  const auto layers = std::span<const RgnnLayerParams<double>>(fx.layers);

  const auto chain = rgnn_readout(tape.constant(fx.x), tape.constant(fx.e), std::span<const sub::SemanticEdge>(),
                                  layers, fw, fb).value();
  const Mat self_only = mm(mm(to_mat(fx.x), to_mat(fx.layers[0].self->value)), to_mat(fx.layers[1].self->value));
  CHECK(max_abs_diff(chain, readout(self_only, to_mat(fw.value), to_mat(fb.value))) < 1e-12);

  const auto got = rgnn_readout(tape.constant(fx.x), tape.constant(fx.e), std::span(fx.edges), layers, fw, fb).value();
  Mat x = to_mat(fx.x), e = to_mat(fx.e);
  for (const auto& layer : fx.layers) {
    std::vector<Mat> wr;
    for (auto* w : layer.relation) wr.push_back(to_mat(w->value));
    const Mat w0 = to_mat(layer.self->value);
    x = rgnn_oracle(x, e, fx.edges, wr, to_mat(layer.gate->value), &w0);
    e = mm(e, to_mat(layer.relation_update->value));
  }
  CHECK(max_abs_diff(got, readout(x, to_mat(fw.value), to_mat(fb.value))) < 1e-9);

  std::vector<std::uint32_t> perm(fx.n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int trial = 0; trial < 10; ++trial) {
    rng.shuffle(std::span(perm));
    Tensor<double> xp(fx.n, fx.in);
    std::vector<std::uint32_t> where(fx.n);
    for (std::uint32_t i = 0; i < fx.n; ++i) {
      where[perm[i]] = i;
      for (std::size_t c = 0; c < fx.in; ++c) xp(i, c) = fx.x(perm[i], c);
    }
    auto edges = fx.edges;
    for (auto& ed : edges) ed.head = where[ed.head], ed.tail = where[ed.tail];
    Tape<double> t2;
    const auto permuted = rgnn_readout(t2.constant(xp), t2.constant(fx.e), std::span(edges), layers, fw, fb).value();
    for (std::size_t c = 0; c < fx.h; ++c) CHECK(std::abs(permuted[c] - got[c]) < 1e-9);
  }
}

TEST_CASE("infonce values and symmetry") {
  Tape<double> tape;
  auto one = tape.constant(Tensor<double>::row({0.3, -2, 1}));
  auto other = tape.constant(Tensor<double>::row({4, 1, 1}));
  CHECK(infonce(one, other, 0.5).value().item() == 0.0);

  auto eye = tape.constant(Tensor<double>::matrix(2, 2, {1, 0, 0, 1}));
  const double expect = -std::log(std::exp(1.0) / (std::exp(1.0) + 1.0));
  CHECK(std::abs(infonce(eye, eye, 1.0).value().item() - expect) < 1e-12);
  CHECK(infonce(eye, eye, 1.0).value().item() == doctest::Approx(0.31326).epsilon(1e-5));

  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_tensor(rng, 5, 3), b = random_tensor(rng, 5, 3);
    const double base = infonce(tape.constant(a), tape.constant(b), 0.5).value().item();
    CHECK(base >= 0.0);
    std::vector<std::size_t> perm{0, 1, 2, 3, 4};
    rng.shuffle(std::span(perm));
    auto pa = ad::gather_rows(tape.constant(a), std::span<const std::size_t>(perm));
    auto pb = ad::gather_rows(tape.constant(b), std::span<const std::size_t>(perm));
    CHECK(std::abs(infonce(pa, pb, 0.5).value().item() - base) < 1e-9);
  }
  auto zero = tape.constant(Tensor<double>::matrix(2, 2, {0, 0, 1, 1}));
  CHECK_THROWS_AS(infonce(zero, eye, 1.0), DomainError);
  CHECK_THROWS_AS(infonce(eye, eye, 0.0), PreconditionError);
}

TEST_CASE("predict and task_loss examples") {
  Tape<double> tape;
  auto zero1 = tape.constant(Tensor<double>(3, 1));
  for (double p : predict(zero1, kg::TaskMode::binary).value().values()) CHECK(p == 0.5);
  auto zero86 = tape.constant(Tensor<double>(2, 86));
  const auto uniform = predict(zero86, kg::TaskMode::multi_class);
  for (double p : uniform.value().values()) CHECK(p == doctest::Approx(1.0 / 86).epsilon(1e-12));
  Rng rng(3);
  auto ml = predict(tape.constant(random_tensor(rng, 4, 5, 10.0)), kg::TaskMode::multi_label);
  for (double p : ml.value().values()) CHECK((p > 0 && p < 1));

  const std::vector<std::vector<std::uint32_t>> cls{{7}, {85}};
  const auto y86 = label_matrix<double>(std::span(cls), kg::TaskMode::multi_class, 86);
  CHECK(task_loss(uniform, y86, kg::TaskMode::multi_class).value().item() ==
        doctest::Approx(std::log(86.0)).epsilon(1e-12));
  CHECK(std::log(86.0) == doctest::Approx(4.4543).epsilon(1e-4));

  const std::vector<std::vector<std::uint32_t>> pos{{1}};
  const auto y1 = label_matrix<double>(std::span(pos), kg::TaskMode::binary, 1);
  auto half = tape.constant(Tensor<double>::scalar(0.5));
  CHECK(task_loss(half, y1, kg::TaskMode::binary).value().item() == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  auto sure = tape.constant(Tensor<double>::matrix(1, 3, {0, 1, 0}));
  const std::vector<std::vector<std::uint32_t>> one{{1}};
  CHECK(task_loss(sure, label_matrix<double>(std::span(one), kg::TaskMode::multi_class, 3),
                  kg::TaskMode::multi_class).value().item() == 0.0);
  auto certain = tape.constant(Tensor<double>::scalar(1.0));
  CHECK(task_loss(certain, y1, kg::TaskMode::binary).value().item() == 0.0);
  auto wrong = tape.constant(Tensor<double>::scalar(0.0));
  CHECK(std::isfinite(task_loss(wrong, y1, kg::TaskMode::binary).value().item()));

  const std::vector<std::vector<std::uint32_t>> multi{{0, 2}, {}};
  const auto ym = label_matrix<double>(std::span(multi), kg::TaskMode::multi_label, 3);
  CHECK(ym == Tensor<double>::matrix(2, 3, {1, 0, 1, 0, 0, 0}));
  CHECK_THROWS_AS(task_loss(half, ym, kg::TaskMode::multi_label), ShapeError);
  CHECK_THROWS_AS(label_matrix<double>(std::span(cls), kg::TaskMode::multi_class, 5), PreconditionError);
}

TEST_CASE("total_loss arithmetic and gradient linearity") {
  Tape<double> tape;
  auto l = tape.constant(Tensor<double>::scalar(1.0));
  auto i = tape.constant(Tensor<double>::scalar(2.0));
  CHECK(total_loss(l, i, 0.0).value().item() == 1.0);
  CHECK(total_loss(l, i, 0.1).value().item() == doctest::Approx(1.2).epsilon(1e-15));

  Rng rng(9);
  auto w = param("w", random_tensor(rng, 3, 2));
  const auto x = random_tensor(rng, 4, 3);
  const auto y = random_tensor(rng, 4, 2);
  auto task = [&](Tape<double>& t) { return ad::mean_all(ad::mul(ad::matmul(t.constant(x), t.leaf(w)), t.constant(y))); };
  auto mi = [&](Tape<double>& t) {
    auto z = ad::matmul(t.constant(x), t.leaf(w));
    return infonce(z, ad::sigmoid(z), 0.5);
  };
  auto grad_of = [&](auto&& build) {
    w.zero_grad();
    Tape<double> t;
    t.backward(build(t));
    return w.grad;
  };
  const double lambda = 0.37;
  const auto gl = grad_of(task), gi = grad_of(mi);
  const auto gt = grad_of([&](Tape<double>& t) { return total_loss(task(t), mi(t), lambda); });
  for (std::size_t k = 0; k < gt.size(); ++k) CHECK(std::abs(gt[k] - (gl[k] + lambda * gi[k])) < 1e-9);
}

namespace {

// Two query links on a small typed graph with their extracted subgraphs.
struct ModelFixture {
  kg::KnowledgeGraph graph;
  std::vector<sub::LocalSubgraph> locals;
  std::vector<sub::SemanticSubgraph> semantics;
  std::vector<LinkInput> inputs;
  Tensor<double> entity, relation;

  explicit ModelFixture(std::size_t links = 2, std::size_t feature_dim = 4, std::size_t max_nodes = 8)
      : graph(random_graph(21, 30, 110, 3)) {
    Rng rng(22);
    entity = random_tensor(rng, graph.entity_count(), feature_dim);
    relation = random_tensor(rng, graph.relation_count(), feature_dim);
    for (std::uint32_t u = 0; u < graph.entity_count() && locals.size() < links; ++u) {
      for (std::uint32_t v = u + 1; v < graph.entity_count() && locals.size() < links; ++v) {
        const EntityId a(u), b(v);
        auto local = sub::extract_local(graph, a, b, sub::LocalConfig{2, max_nodes, true}, 5);
        const auto paths = sub::default_metapaths(graph, graph.type_name(a), graph.type_name(b), 2);
        auto semantic = sub::extract_semantic(graph, a, b, paths);
        if (local.nodes.size() < 4 || local.observed_edges.empty() || semantic.edges.size() < 2) continue;
        locals.push_back(std::move(local));
        semantics.push_back(std::move(semantic));
      }
    }
    REQUIRE(locals.size() == links);
    for (std::size_t i = 0; i < links; ++i) inputs.push_back({&locals[i], &semantics[i]});
  }

  std::vector<Tensor<double>> fixed_noise(std::uint64_t seed) const {
    Rng rng(seed);
    std::vector<Tensor<double>> eps;
    for (const auto& l : locals) {
      Tensor<double> e(l.candidate_pairs.size(), 1);
      for (auto& v : e.values()) v = rng.uniform(0.05, 0.95);
      eps.push_back(std::move(e));
    }
    return eps;
  }
};

ModelConfig small_config(EstimatorKind kind) {
  ModelConfig c;
  c.estimator = kind;
  c.hidden = 8;
  return c;
}

}  // namespace

TEST_CASE("end-to-end gradient check over a fixed-noise two-link batch") {
  ModelFixture fx;
  const auto eps = fx.fixed_noise(3);
  const std::vector<std::vector<std::uint32_t>> labels{{1}, {0}};
  for (auto kind : {EstimatorKind::attention, EstimatorKind::mlp, EstimatorKind::weighted_cosine,
                    EstimatorKind::cosine}) {
    for (bool fine_tune : {false, true}) {
      auto cfg = small_config(kind);
      cfg.fine_tune = fine_tune;
      DenoisedLP<double> m(cfg, fx.entity, fx.relation, 77);
      auto params = m.trainable();
      const auto report = ad::grad_check(
          [&](Tape<double>& tape) {
            ForwardOptions<double> opt{true, nullptr, std::span<const Tensor<double>>(eps)};
            return m.loss(m.forward(tape, std::span(fx.inputs), opt), std::span(labels)).total;
          },
          params);
      INFO("estimator " << to_string(kind) << " worst " << report.worst_param << "[" << report.worst_index
                        << "] analytic " << report.worst_analytic << " numeric " << report.worst_numeric);
      CHECK(report.max_rel_error < 1e-4);
      std::set<std::string> names;
      for (auto* p : params) names.insert(p->name);
      CHECK(names.contains("rgnn.0.gate.weight"));
      CHECK(names.contains("rgnn.1.relation.2.weight"));
      if (kind == EstimatorKind::attention) CHECK(names.contains("srl.attention.weight"));
      if (kind == EstimatorKind::weighted_cosine) CHECK(names.contains("srl.cosine.weight"));
      CHECK(names.contains("features.entity") == fine_tune);
    }
  }
}

TEST_CASE("gradient check for each task mode and ablation") {
  ModelFixture fx;
  const auto eps = fx.fixed_noise(4);
  struct Case {
    kg::TaskMode mode;
    std::size_t classes;
    std::vector<std::vector<std::uint32_t>> labels;
    Ablation ablate;
  };
  const Case cases[] = {
      {kg::TaskMode::multi_class, 5, {{3}, {0}}, {}},
      {kg::TaskMode::multi_label, 4, {{0, 2}, {}}, {}},
      {kg::TaskMode::binary, 1, {{1}, {1}}, Ablation{true, false, false}},
      {kg::TaskMode::binary, 1, {{0}, {1}}, Ablation{false, true, false}},
      {kg::TaskMode::binary, 1, {{0}, {1}}, Ablation{false, false, true}},
  };
  for (const auto& c : cases) {
    auto cfg = small_config(EstimatorKind::attention);
    cfg.mode = c.mode;
    cfg.classes = c.classes;
    cfg.ablate = c.ablate;
    cfg.projection_activation = Activation::identity;
    DenoisedLP<double> m(cfg, fx.entity, fx.relation, 5);
    auto params = m.trainable();
    const auto report = ad::grad_check(
        [&](Tape<double>& tape) {
          ForwardOptions<double> opt{true, nullptr, std::span<const Tensor<double>>(eps)};
          return m.loss(m.forward(tape, std::span(fx.inputs), opt), std::span(c.labels)).total;
        },
        params);
    INFO("worst " << report.worst_param);
    CHECK(report.max_rel_error < 1e-4);
  }
}

TEST_CASE("ablations change the computation graph") {
  ModelFixture fx;
  const std::vector<std::vector<std::uint32_t>> labels{{1}, {0}};
  {
    DenoisedLP<double> full(small_config(EstimatorKind::attention), fx.entity, fx.relation, 1);
    Tape<double> tape;
    auto out = full.forward(tape, std::span(fx.inputs), {});
    CHECK(out.mi.has_value());
    CHECK(out.h_sem.has_value());
    const auto parts = full.loss(out, std::span(labels));
    CHECK(parts.total.value().item() ==
          doctest::Approx(parts.task.value().item() + 0.1 * out.mi->value().item()).epsilon(1e-12));
  }
  {
    auto cfg = small_config(EstimatorKind::attention);
    cfg.ablate.mi = true;
    DenoisedLP<double> m(cfg, fx.entity, fx.relation, 1);
    Tape<double> tape;
    auto out = m.forward(tape, std::span(fx.inputs), {});
    CHECK_FALSE(out.mi.has_value());
    const auto parts = m.loss(out, std::span(labels));
    CHECK(parts.total.value().item() == parts.task.value().item());
  }
  {
    auto cfg = small_config(EstimatorKind::attention);
    cfg.ablate.ssp = true;
    DenoisedLP<double> m(cfg, fx.entity, fx.relation, 1);
    CHECK_FALSE(m.has_parameter("rgnn.0.gate.weight"));
    CHECK(m.parameter("classifier.weight").value.rows() == 8);
    Tape<double> tape;
    auto out = m.forward(tape, std::span(fx.inputs), {});
    CHECK_FALSE(out.h_sem.has_value());
    CHECK_FALSE(out.mi.has_value());
  }
  {
    auto cfg = small_config(EstimatorKind::attention);
    cfg.ablate.srl = true;
    DenoisedLP<double> m(cfg, fx.entity, fx.relation, 1);
    CHECK_FALSE(m.has_parameter("srl.attention.weight"));
    Tape<double> tape;
    auto out = m.forward(tape, std::span(fx.inputs), {});
    for (std::size_t b = 0; b < fx.inputs.size(); ++b) CHECK(out.kept_edges[b] == fx.locals[b].observed_edges.size());
  }
  {
    auto cfg = small_config(EstimatorKind::attention);
    cfg.self_term = false;
    DenoisedLP<double> m(cfg, fx.entity, fx.relation, 1);
    CHECK_FALSE(m.has_parameter("rgnn.0.self.weight"));
  }
}

TEST_CASE("eval mode is deterministic and survives a checkpoint") {
  ModelFixture fx(3);
  DenoisedLP<float> m(small_config(EstimatorKind::attention), fx.entity.cast<float>(), fx.relation.cast<float>(), 9);
  const auto a = m.predict_probs(std::span(fx.inputs));
  const auto b = m.predict_probs(std::span(fx.inputs));
  CHECK(a == b);
  ad::Checkpoint ck;
  m.store(ck);
  std::stringstream buf;
  ck.write(buf);
  auto restored = DenoisedLP<float>::restore(ad::Checkpoint::read(buf));
  CHECK(restored.config() == m.config());
  CHECK(restored.predict_probs(std::span(fx.inputs)) == a);

  Tape<float> tape;
  auto out = m.forward(tape, std::span(fx.inputs), {});
  for (std::size_t l = 0; l < fx.inputs.size(); ++l) {
    CHECK(out.weights[l] == out.pi[l]);
    std::size_t expect = 0;
    for (float p : out.pi[l].values()) {
      CHECK((p >= 0.0f && p <= 1.0f));
      expect += p >= 0.5f;
    }
    CHECK(out.kept_edges[l] == expect);
  }
  Rng r1(4), r2(4);
  Tape<float> t1, t2;
  const auto s1 = m.forward(t1, std::span(fx.inputs), ForwardOptions<float>{true, &r1}).probs.value();
  const auto s2 = m.forward(t2, std::span(fx.inputs), ForwardOptions<float>{true, &r2}).probs.value();
  CHECK(s1 == s2);
  Tape<float> t3;
  CHECK_THROWS_AS(m.forward(t3, std::span(fx.inputs), ForwardOptions<float>{true, nullptr}), PreconditionError);
}

TEST_CASE("model readouts are invariant to subgraph node order") {
  ModelFixture fx(1);
  DenoisedLP<double> m(small_config(EstimatorKind::weighted_cosine), fx.entity, fx.relation, 13);
  Tape<double> tape;
  auto base = m.forward(tape, std::span(fx.inputs), {});
  Rng rng(14);
  for (int trial = 0; trial < 5; ++trial) {
    // Relabel every node, then remap edges and pairs (pairs keep i < j).
    auto local = fx.locals[0];
    std::vector<std::uint32_t> perm(local.nodes.size());
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(std::span(perm));
    std::vector<std::uint32_t> where(perm.size());
    for (std::uint32_t i = 0; i < perm.size(); ++i) where[perm[i]] = i;
    sub::LocalSubgraph pl;
    for (auto p : perm) pl.nodes.push_back(local.nodes[p]);
    auto remap = [&](const std::vector<sub::NodePair>& in) {
      std::vector<sub::NodePair> out;
      for (auto [i, j] : in) out.emplace_back(std::min(where[i], where[j]), std::max(where[i], where[j]));
      return out;
    };
    pl.observed_edges = remap(local.observed_edges);
    pl.candidate_pairs = remap(local.candidate_pairs);

    auto sem = fx.semantics[0];
    std::vector<std::uint32_t> sp(sem.nodes.size());
    std::iota(sp.begin(), sp.end(), 0);
    rng.shuffle(std::span(sp));
    std::vector<std::uint32_t> sw(sp.size());
    for (std::uint32_t i = 0; i < sp.size(); ++i) sw[sp[i]] = i;
    sub::SemanticSubgraph ps;
    for (auto p : sp) ps.nodes.push_back(sem.nodes[p]), ps.types.push_back(sem.types[p]);
    for (auto e : sem.edges) ps.edges.push_back({sw[e.head], e.relation, sw[e.tail]});

    const LinkInput input[] = {{&pl, &ps}};
    Tape<double> t2;
    auto out = m.forward(t2, std::span(input), {});
    for (std::size_t c = 0; c < 8; ++c) {
      CHECK(std::abs(out.h_sub.value()[c] - base.h_sub.value()[c]) < 1e-9);
      CHECK(std::abs(out.h_sem->value()[c] - base.h_sem->value()[c]) < 1e-9);
    }
  }
}

TEST_CASE("model construction errors") {
  ModelFixture fx(1);
  auto cfg = small_config(EstimatorKind::attention);
  cfg.classes = 3;
  CHECK_THROWS_AS(DenoisedLP<double>(cfg, fx.entity, fx.relation, 1), PreconditionError);
  CHECK_THROWS_AS(DenoisedLP<double>(small_config(EstimatorKind::mlp), fx.entity, Tensor<double>(3, 2), 1),
                  ShapeError);
  DenoisedLP<double> m(small_config(EstimatorKind::mlp), fx.entity, fx.relation, 1);
  CHECK_THROWS_AS(m.parameter("nope"), LookupError);
  Tape<double> tape;
  CHECK_THROWS_AS(m.forward(tape, std::span<const LinkInput>(), {}), PreconditionError);
  CHECK(parse_estimator("weighted_cosine") == EstimatorKind::weighted_cosine);
  CHECK_THROWS_AS(parse_estimator("dot"), ConfigError);
}
