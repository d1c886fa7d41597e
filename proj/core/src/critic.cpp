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

#include "tspd/critic.hpp"

#include "tspd/error.hpp"
#include "tspd/ops.hpp"

namespace tspd {

void CriticConfig::validate() const {
  if (depth == 0) throw ArgumentError("critic: depth must be at least 1");
  if (width == 0) throw ArgumentError("critic: width must be positive");
}

void add_critic_head_parameters(nn::ParameterSet& params, const CriticConfig& cfg, std::size_t input_dim,
                                const std::string& prefix, SplitMix64& rng) {
  cfg.validate();
  std::size_t in = kCriticPools * input_dim;
  for (std::size_t l = 0; l < cfg.depth; ++l) {
    const std::size_t out = l + 1 == cfg.depth ? 1 : cfg.width;
    params.add(prefix + "W" + std::to_string(l), nn::uniform_init(in, out, in, rng));
    params.add(prefix + "b" + std::to_string(l), nn::Matrix(1, out));
    in = out;
  }
}

nn::Var critic_value(nn::Tape& tape, nn::Var e_static, const nn::ParameterSet& params, const CriticConfig& cfg,
                     const std::string& prefix) {
  cfg.validate();
  nn::Var pools[] = {nn::mean_rows(e_static), nn::max_rows(e_static)};
  nn::Var x = nn::concat_cols(pools);
  for (std::size_t l = 0; l < cfg.depth; ++l) {
    x = nn::add_row(nn::matmul(x, tape.parameter(params, prefix + "W" + std::to_string(l))),
                    tape.parameter(params, prefix + "b" + std::to_string(l)));
    if (l + 1 < cfg.depth) x = nn::relu(x);
  }
  return x;
}

}  // namespace tspd
