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

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "tspd/autograd.hpp"
#include "tspd/parameters.hpp"

namespace tspd::testing {

inline constexpr double kFiniteDifferenceStep = 1e-4;
inline constexpr double kGradientTolerance = 1e-5;

/// Builds a scalar loss from the leaves bound to `params`.
using LossBuilder = std::function<nn::Var(nn::Tape&, const nn::ParameterSet&)>;

struct TensorCheck {
  std::string name;
  double relative_error = 0.0;
};

struct GradientReport {
  std::vector<TensorCheck> tensors;
  double worst = 0.0;
  std::string worst_name;
};

/// Central differences against tape gradients, per tensor:
/// |g_analytic - g_numeric| / max(|g_analytic| + |g_numeric|, 1e-8) in the
/// Euclidean norm.
inline GradientReport check_gradients(nn::ParameterSet params, const LossBuilder& build,
                                      double h = kFiniteDifferenceStep) {
  nn::ParameterSet analytic = params.zeros_like();
  {
    nn::Tape tape;
    nn::Var loss = build(tape, params);
    tape.backward(loss);
    tape.collect(params, analytic);
  }
  auto eval = [&]() {
    nn::Tape tape(false);
    return tape.value(build(tape, params))[0];
  };
  GradientReport report;
  for (std::size_t i = 0; i < params.size(); ++i) {
    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    nn::Matrix& p = params.at(i);
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double orig = p[j];
      p[j] = orig + h;
      const double up = eval();
      p[j] = orig - h;
      const double down = eval();
      p[j] = orig;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic.at(i)[j];
      diff2 += (a - numeric) * (a - numeric);
      a2 += a * a;
      n2 += numeric * numeric;
    }
    const double rel = std::sqrt(diff2) / std::max(std::sqrt(a2) + std::sqrt(n2), 1e-8);
    report.tensors.push_back({params.name(i), rel});
    if (rel >= report.worst) {
      report.worst = rel;
      report.worst_name = params.name(i);
    }
  }
  return report;
}

}  // namespace tspd::testing
