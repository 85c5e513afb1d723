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

#include "dlp/diffcore/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace dlp::ad {
namespace {

double evaluate(const LossBuilder& loss) {
  Tape<double> tape;
  const double v = loss(tape).value().item();
  if (!std::isfinite(v)) throw NumericError("grad_check: loss is not finite");
  return v;
}

}  // namespace

GradCheckReport grad_check(const LossBuilder& loss, std::span<Parameter<double>* const> params,
                           double epsilon) {
  for (auto* p : params) p->zero_grad();
  {
    Tape<double> tape;
    Var<double> out = loss(tape);
    if (!std::isfinite(out.value().item())) throw NumericError("grad_check: loss is not finite");
    tape.backward(out);
  }
  std::vector<std::vector<double>> analytic;
  for (auto* p : params) analytic.emplace_back(p->grad.values().begin(), p->grad.values().end());

  GradCheckReport report;
  for (std::size_t q = 0; q < params.size(); ++q) {
    auto values = params[q]->value.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + epsilon;
      const double up = evaluate(loss);
      values[i] = saved - epsilon;
      const double down = evaluate(loss);
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      const double a = analytic[q][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double rel = std::abs(a - numeric) / denom;
      ++report.checked;
      if (report.worst_param.empty() || rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = params[q]->name;
        report.worst_index = i;
        report.worst_analytic = a;
        report.worst_numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace dlp::ad
