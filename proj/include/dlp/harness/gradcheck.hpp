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

#include "dlp/diffcore/grad_check.hpp"
#include "dlp/model/ops.hpp"

namespace dlp::harness {

struct GradcheckOptions {
  std::uint64_t seed = 1;
  model::EstimatorKind estimator = model::EstimatorKind::attention;
  std::size_t hidden = 8;
  std::size_t dim = 4;  // complex pretraining dimension; features are 2 * dim wide
  double epsilon = 1e-5;
  /// Uniform noise added to every parameter so the check point is not the
  /// initialization (zero biases).
  double jitter = 0.05;
};

struct GradcheckOutcome {
  ad::GradCheckReport report;
  std::size_t entities = 0;
  std::size_t triples = 0;
  std::size_t parameters = 0;  // scalar count
};

/// Finite-difference check of the total loss on a small planted graph: one
/// positive and one negative link, fixed relaxation noise, 64-bit, every
/// parameter including the (fine-tuned) features, perturbed by `jitter`.
GradcheckOutcome end_to_end_gradcheck(const GradcheckOptions& options);

}  // namespace dlp::harness
