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

#include "tspd/optim.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "tspd/error.hpp"

namespace tspd::nn {

AdaBelief::AdaBelief(const ParameterSet& layout, AdaBeliefConfig cfg)
    : cfg_(cfg), m_(layout.zeros_like()), v_(layout.zeros_like()) {}

void AdaBelief::step(ParameterSet& params, const ParameterSet& grads, double lr) {
  if (!params.same_layout(m_) || !grads.same_layout(m_)) {
    throw ArgumentError("optimizer: parameter layout mismatch");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!all_finite(grads.at(i))) throw NumericError("non-finite gradient in " + grads.name(i) + "; step skipped");
  }
  const double b1 = cfg_.beta1, b2 = cfg_.beta2;
  const double decay = 1.0 - lr * cfg_.weight_decay;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& theta = params.at(i);
    Matrix& m = m_.at(i);
    Matrix& v = v_.at(i);
    const Matrix& g = grads.at(i);
    for (std::size_t j = 0; j < theta.size(); ++j) {
      theta[j] *= decay;
      m[j] = b1 * m[j] + (1.0 - b1) * g[j];
      const double dev = g[j] - m[j];
      v[j] = b2 * v[j] + (1.0 - b2) * dev * dev;
      theta[j] -= lr * m[j] / (std::sqrt(v[j]) + cfg_.eps);
    }
  }
  ++t_;
}

double cosine_lr(std::uint64_t t, std::uint64_t t_max, double eta_max, double min_ratio) {
  if (t_max == 0) throw ArgumentError("cosine_lr: t_max must be positive");
  const double eta_min = min_ratio * eta_max;
  const double phase = static_cast<double>(t % t_max) / static_cast<double>(t_max);
  const double w = 0.5 * (1.0 + std::cos(std::numbers::pi * phase));
  return w * eta_max + (1.0 - w) * eta_min;
}

}  // namespace tspd::nn
