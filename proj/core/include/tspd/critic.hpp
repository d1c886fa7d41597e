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

#include <cstddef>
#include <string>

#include "tspd/autograd.hpp"
#include "tspd/parameters.hpp"
#include "tspd/rng.hpp"

namespace tspd {

struct CriticConfig {
  std::size_t width = 128;
  /// Number of linear layers; ReLU between them.
  std::size_t depth = 2;

  void validate() const;
};

/// Mean and max pools are concatenated before the MLP.
inline constexpr std::size_t kCriticPools = 2;

void add_critic_head_parameters(nn::ParameterSet& params, const CriticConfig& cfg, std::size_t input_dim,
                                const std::string& prefix, SplitMix64& rng);

/// [mean-pool, max-pool] over node rows, then the MLP. Returns 1 x 1.
nn::Var critic_value(nn::Tape& tape, nn::Var e_static, const nn::ParameterSet& params, const CriticConfig& cfg,
                     const std::string& prefix);

}  // namespace tspd
