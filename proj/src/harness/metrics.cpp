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

#include "dlp/harness/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dlp/common/error.hpp"

namespace dlp::harness {

namespace {

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) throw PreconditionError("metric inputs differ in length");
}

}  // namespace

double auc_roc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  check_lengths(scores.size(), labels.size());
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]]) positive_rank_sum += midrank, ++positives;
    }
    i = j;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) throw PreconditionError("auc_roc needs both positive and negative labels");
  const double p = static_cast<double>(positives), q = static_cast<double>(negatives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * q);
}

double auc_pr(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  check_lengths(scores.size(), labels.size());
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (!labels[order[r]]) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(r + 1);
  }
  if (hits == 0) throw PreconditionError("auc_pr needs at least one positive label");
  return sum / static_cast<double>(hits);
}

MicroCounts single_label_counts(std::span<const std::uint32_t> predicted, std::span<const std::uint32_t> truth) {
  check_lengths(predicted.size(), truth.size());
  MicroCounts c;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] == truth[i]) {
      ++c.tp;
    } else {
      ++c.fp;
      ++c.fn;
    }
  }
  return c;
}

double micro_f1(const MicroCounts& c) {
  const double denom = static_cast<double>(2 * c.tp + c.fp + c.fn);
  return denom == 0.0 ? 0.0 : static_cast<double>(2 * c.tp) / denom;
}

double micro_recall(const MicroCounts& c) {
  const double denom = static_cast<double>(c.tp + c.fn);
  return denom == 0.0 ? 0.0 : static_cast<double>(c.tp) / denom;
}

double micro_f1(std::span<const std::uint32_t> predicted, std::span<const std::uint32_t> truth) {
  return micro_f1(single_label_counts(predicted, truth));
}

double micro_recall(std::span<const std::uint32_t> predicted, std::span<const std::uint32_t> truth) {
  return micro_recall(single_label_counts(predicted, truth));
}

Summary summarize(std::span<const double> values) {
  Summary s;
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double acc = 0.0;
  for (double v : values) acc += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(acc / static_cast<double>(values.size()));
  return s;
}

}  // namespace dlp::harness
