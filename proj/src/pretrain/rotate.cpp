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

#include "dlp/pretrain/rotate.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>

#include "dlp/common/error.hpp"
#include "dlp/common/rng.hpp"
#include "dlp/diffcore/adam.hpp"
#include "dlp/diffcore/ops.hpp"

namespace dlp::embed {

using ad::Tensor;

ad::Tensor<double> EmbeddingTable::relation_vector(RelationId r) const {
  const std::size_t d = dim();
  Tensor<double> out(1, 2 * d);
  for (std::size_t k = 0; k < d; ++k) {
    out[2 * k] = std::cos(phase(r.index(), k));
    out[2 * k + 1] = std::sin(phase(r.index(), k));
  }
  return out;
}

void EmbeddingTable::store(ad::Checkpoint& ck) const {
  ck.put("embedding.entity", entity);
  ck.put("embedding.relation_phase", phase);
}

EmbeddingTable EmbeddingTable::restore(const ad::Checkpoint& ck) {
  EmbeddingTable t{ck.get<double>("embedding.entity"), ck.get<double>("embedding.relation_phase")};
  if (t.entity.cols() != 2 * t.phase.cols()) throw ShapeError("embedding table: entity width != 2 * dim");
  return t;
}

double wrap_phase(double theta) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  return theta - two_pi * std::ceil((theta - std::numbers::pi) / two_pi);
}

double rotate_score(const kg::Triple& triple, const EmbeddingTable& table) {
  if (triple.head.index() >= table.entity_count() || triple.tail.index() >= table.entity_count() ||
      triple.relation.index() >= table.relation_count()) {
    throw LookupError("rotate_score: id outside the embedding table");
  }
  const std::size_t d = table.dim();
  const auto h = table.entity.row_span(triple.head.index());
  const auto t = table.entity.row_span(triple.tail.index());
  const auto p = table.phase.row_span(triple.relation.index());
  double acc = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double c = std::cos(p[k]), s = std::sin(p[k]);
    const double re = h[2 * k] * c - h[2 * k + 1] * s - t[2 * k];
    const double im = h[2 * k] * s + h[2 * k + 1] * c - t[2 * k + 1];
    acc += re * re + im * im;
  }
  return std::sqrt(acc);
}

namespace {

// Draws a replacement for one side, by rejection and then by enumeration.
std::optional<kg::Triple> corrupt(const kg::Triple& triple, const kg::KnowledgeGraph& graph, bool head,
                                  Rng& rng) {
  const std::size_t n = graph.entity_count();
  auto make = [&](std::size_t e) {
    kg::Triple c = triple;
    (head ? c.head : c.tail) = EntityId(static_cast<std::uint32_t>(e));
    return c;
  };
  auto ok = [&](const kg::Triple& c) { return !graph.contains(c); };
  for (int attempt = 0; attempt < 32; ++attempt) {
    const auto c = make(rng.below(n));
    if (ok(c)) return c;
  }
  std::vector<kg::Triple> pool;
  for (std::size_t e = 0; e < n; ++e) {
    const auto c = make(e);
    if (ok(c)) pool.push_back(c);
  }
  if (pool.empty()) return std::nullopt;
  return pool[rng.below(pool.size())];
}

}  // namespace

std::vector<kg::Triple> negative_sample(const kg::Triple& triple, const kg::KnowledgeGraph& graph,
                                        std::size_t n, std::uint64_t seed) {
  if (n == 0) throw PreconditionError("negative_sample: n must be >= 1");
  if (graph.entity_count() == 0) throw ExhaustedError("negative_sample: empty graph");
  Rng rng(seed);
  std::vector<kg::Triple> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool head_first = rng.coin();
    auto c = corrupt(triple, graph, head_first, rng);
    if (!c) c = corrupt(triple, graph, !head_first, rng);
    if (!c) throw ExhaustedError("negative_sample: no admissible corruption");
    out.push_back(*c);
  }
  return out;
}

EmbeddingTable initial_table(std::size_t entities, std::size_t relations, const PretrainConfig& config) {
  if (config.dim == 0) throw PreconditionError("pretrain: dim must be >= 1");
  Rng rng(Rng::mix(config.seed) ^ 0x51ed27ULL);
  EmbeddingTable t{Tensor<double>(entities, 2 * config.dim), Tensor<double>(relations, config.dim)};
  for (auto& v : t.entity.values()) v = rng.uniform(-config.init_scale, config.init_scale);
  for (auto& v : t.phase.values()) v = wrap_phase(rng.uniform(-std::numbers::pi, std::numbers::pi));
  return t;
}

namespace {

template <typename T>
PretrainResult run(const kg::KnowledgeGraph& graph, const PretrainConfig& config) {
  const std::size_t d = config.dim;
  EmbeddingTable init = initial_table(graph.entity_count(), graph.relation_count(), config);
  PretrainResult result;
  if (config.epochs == 0) {
    result.table = std::move(init);
    return result;
  }
  ad::Parameter<T> entity("pretrain.entity", init.entity.cast<T>());
  ad::Parameter<T> phase("pretrain.phase", init.phase.cast<T>());
  ad::Parameter<T>* params[] = {&entity, &phase};
  ad::Adam<T> opt(params, ad::AdamConfig{config.lr});

  std::vector<std::size_t> even(d), odd(d);
  for (std::size_t k = 0; k < d; ++k) even[k] = 2 * k, odd[k] = 2 * k + 1;

  const auto triples = graph.triples();
  const std::size_t m = triples.size();
  const std::size_t neg = std::max<std::size_t>(config.negatives, 1);
  const std::size_t batch = std::max<std::size_t>(config.batch_size, 1);
  Rng rng(config.seed);
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;

  std::vector<std::vector<kg::Triple>> negatives(m);
  auto draw_negatives = [&] {
    for (std::size_t i = 0; i < m; ++i) negatives[i] = negative_sample(triples[i], graph, neg, rng.next());
  };
  draw_negatives();

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    if (epoch > 0 && config.resample_negatives) draw_negatives();
    rng.shuffle(std::span(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < m; start += batch) {
      const std::size_t stop = std::min(m, start + batch);
      const std::size_t p = stop - start;
      // Rows 0..p-1 are positives; negative j of positive i sits at p + i*neg + j.
      std::vector<std::size_t> heads, rels, tails;
      for (std::size_t i = start; i < stop; ++i) {
        const auto& t = triples[order[i]];
        heads.push_back(t.head.index());
        rels.push_back(t.relation.index());
        tails.push_back(t.tail.index());
      }
      for (std::size_t i = start; i < stop; ++i) {
        for (const auto& t : negatives[order[i]]) {
          heads.push_back(t.head.index());
          rels.push_back(t.relation.index());
          tails.push_back(t.tail.index());
        }
      }
      ad::Tape<T> tape;
      auto X = tape.leaf(entity);
      auto P = tape.leaf(phase);
      auto h = ad::gather_rows(X, std::span<const std::size_t>(heads));
      auto tl = ad::gather_rows(X, std::span<const std::size_t>(tails));
      auto th = ad::gather_rows(P, std::span<const std::size_t>(rels));
      auto c = ad::cos(th), s = ad::sin(th);
      auto hre = ad::gather_cols(h, std::span<const std::size_t>(even));
      auto him = ad::gather_cols(h, std::span<const std::size_t>(odd));
      auto tre = ad::gather_cols(tl, std::span<const std::size_t>(even));
      auto tim = ad::gather_cols(tl, std::span<const std::size_t>(odd));
      auto dre = ad::sub(ad::sub(ad::mul(hre, c), ad::mul(him, s)), tre);
      auto dim = ad::sub(ad::add(ad::mul(hre, s), ad::mul(him, c)), tim);
      std::vector<ad::Var<T>> parts{dre, dim};
      auto score = ad::l2norm(ad::concat_cols<T>(parts), ad::Axis::cols);

      std::vector<std::size_t> pos_idx, neg_idx;
      for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < neg; ++j) pos_idx.push_back(i), neg_idx.push_back(p + i * neg + j);
      auto sp = ad::gather_rows(score, std::span<const std::size_t>(pos_idx));
      auto sn = ad::gather_rows(score, std::span<const std::size_t>(neg_idx));
      auto margin = ad::relu(ad::affine(ad::sub(sp, sn), T(1), static_cast<T>(config.margin)));
      ad::Var<T> loss;
      if (config.self_adversarial) {
        Tensor<T> w(p * neg, 1);
        const auto& snv = sn.value();
        for (std::size_t i = 0; i < p; ++i) {
          T mx = -snv[i * neg] * static_cast<T>(config.adversarial_temperature);
          for (std::size_t j = 1; j < neg; ++j)
            mx = std::max(mx, -snv[i * neg + j] * static_cast<T>(config.adversarial_temperature));
          T z = 0;
          for (std::size_t j = 0; j < neg; ++j) {
            w[i * neg + j] = std::exp(-snv[i * neg + j] * static_cast<T>(config.adversarial_temperature) - mx);
            z += w[i * neg + j];
          }
          for (std::size_t j = 0; j < neg; ++j) w[i * neg + j] /= z * static_cast<T>(p);
        }
        loss = ad::sum_all(ad::mul(margin, tape.constant(std::move(w))));
      } else {
        loss = ad::mean_all(margin);
      }
      const double lv = static_cast<double>(loss.value().item());
      if (!std::isfinite(lv)) {
        std::ostringstream msg;
        msg << "pretrain: non-finite loss at epoch " << epoch << ", batch starting " << start;
        throw NumericError(msg.str());
      }
      epoch_loss += lv * static_cast<double>(p);
      opt.zero_grad();
      tape.backward(loss);
      opt.step();
      for (auto& v : phase.value.values()) v = static_cast<T>(wrap_phase(static_cast<double>(v)));
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(std::max<std::size_t>(m, 1)));
  }
  result.table = EmbeddingTable{entity.value.template cast<double>(), phase.value.template cast<double>()};
  return result;
}

}  // namespace

PretrainResult pretrain(const kg::KnowledgeGraph& graph, const PretrainConfig& config) {
  if (config.dim == 0) throw PreconditionError("pretrain: dim must be >= 1");
  if (graph.triple_count() == 0) throw PreconditionError("pretrain: graph has no triples");
  return config.double_precision ? run<double>(graph, config) : run<float>(graph, config);
}

}  // namespace dlp::embed
