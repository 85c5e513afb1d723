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

#include <cmath>
#include <span>
#include <vector>

#include "dlp/diffcore/tensor.hpp"

namespace dlp::ad {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

/// Adaptive-moment optimizer over a fixed list of parameters.
template <typename T>
class Adam {
 public:
  Adam(std::span<Parameter<T>* const> params, AdamConfig config)
      : params_(params.begin(), params.end()), config_(config) {
    for (auto* p : params_) {
      m_.emplace_back(p->value.size(), T(0));
      v_.emplace_back(p->value.size(), T(0));
    }
  }

  void step() {
    ++t_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    const T b1 = static_cast<T>(config_.beta1), b2 = static_cast<T>(config_.beta2);
    const T lr = static_cast<T>(config_.lr), eps = static_cast<T>(config_.eps);
    const T wd = static_cast<T>(config_.weight_decay);
    for (std::size_t q = 0; q < params_.size(); ++q) {
      auto value = params_[q]->value.values();
      auto grad = params_[q]->grad.values();
      auto& m = m_[q];
      auto& v = v_[q];
      for (std::size_t i = 0; i < value.size(); ++i) {
        const T g = grad[i] + wd * value[i];
        m[i] = b1 * m[i] + (T(1) - b1) * g;
        v[i] = b2 * v[i] + (T(1) - b2) * g * g;
        const T mhat = m[i] / static_cast<T>(c1);
        const T vhat = v[i] / static_cast<T>(c2);
        value[i] -= lr * mhat / (std::sqrt(vhat) + eps);
      }
    }
  }

  void zero_grad() {
    for (auto* p : params_) p->zero_grad();
  }

  long steps() const { return t_; }

 private:
  std::vector<Parameter<T>*> params_;
  AdamConfig config_;
  std::vector<std::vector<T>> m_, v_;
  long t_ = 0;
};

}  // namespace dlp::ad
