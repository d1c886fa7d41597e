// Copyright 2026 The tspd Authors
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

#include "tspd/parameters.hpp"

namespace tspd::nn {

struct AdaBeliefConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-16;
  double weight_decay = 0.01;
};

/// AdaBelief without bias correction and with decoupled weight decay:
///   theta *= 1 - lr * wd
///   m = b1 m + (1 - b1) g
///   v = b2 v + (1 - b2) (g - m)^2
///   theta -= lr * m / (sqrt(v) + eps)
class AdaBelief {
 public:
  AdaBelief() = default;
  AdaBelief(const ParameterSet& layout, AdaBeliefConfig cfg = {});

  /// Applies one update. Throws NumericError and leaves params and state
  /// untouched when grads contain a non-finite value.
  void step(ParameterSet& params, const ParameterSet& grads, double lr);

  const AdaBeliefConfig& config() const noexcept { return cfg_; }
  const ParameterSet& first_moment() const noexcept { return m_; }
  const ParameterSet& belief() const noexcept { return v_; }
  std::uint64_t steps() const noexcept { return t_; }

 private:
  AdaBeliefConfig cfg_;
  ParameterSet m_;
  ParameterSet v_;
  std::uint64_t t_ = 0;
};

/// eta_min + (eta_max - eta_min)(1 + cos(pi (t mod t_max) / t_max)) / 2 with
/// eta_min = min_ratio * eta_max.
double cosine_lr(std::uint64_t t, std::uint64_t t_max, double eta_max, double min_ratio = 0.01);

}  // namespace tspd::nn
