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

#include <functional>
#include <span>
#include <string>

#include "dlp/diffcore/tape.hpp"

namespace dlp::ad {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
};

/// Builds the scalar loss on the given tape. Must be deterministic: any
/// sampled noise has to be drawn once outside and reused.
using LossBuilder = std::function<Var<double>(Tape<double>&)>;

/// Compares backward() against central differences
/// (f(θ+ε) - f(θ-ε)) / 2ε element by element, with relative error
/// |a - n| / max(|a|, |n|, 1e-8). Throws NumericError on a non-finite loss.
GradCheckReport grad_check(const LossBuilder& loss, std::span<Parameter<double>* const> params,
                           double epsilon = 1e-5);

}  // namespace dlp::ad
