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

#include <cstdint>
#include <span>
#include <vector>

namespace dlp::harness {

/// Probability that a random positive outscores a random negative, ties
/// counting one half (midranks). Throws PreconditionError unless both
/// classes are present.
double auc_roc(std::span<const double> scores, std::span<const std::uint8_t> labels);

/// Average precision: mean over positives of the precision at that
/// positive's rank. Ranks sort by descending score, ties by ascending index.
/// Throws PreconditionError without positives.
double auc_pr(std::span<const double> scores, std::span<const std::uint8_t> labels);

/// Pooled true/false positive and false negative counts.
struct MicroCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  MicroCounts& operator+=(const MicroCounts& o) {
    tp += o.tp, fp += o.fp, fn += o.fn;
    return *this;
  }
};

/// Single-label multi-class counts: a wrong prediction is one FP (for the
/// predicted class) and one FN (for the true class).
MicroCounts single_label_counts(std::span<const std::uint32_t> predicted, std::span<const std::uint32_t> truth);

double micro_f1(const MicroCounts& c);
double micro_recall(const MicroCounts& c);

/// Single-label convenience forms; both equal accuracy.
double micro_f1(std::span<const std::uint32_t> predicted, std::span<const std::uint32_t> truth);
double micro_recall(std::span<const std::uint32_t> predicted, std::span<const std::uint32_t> truth);

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};
Summary summarize(std::span<const double> values);

}  // namespace dlp::harness
