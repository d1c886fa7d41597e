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
#include <span>
#include <string>
#include <vector>

#include "tspd/autograd.hpp"
#include "tspd/encoder.hpp"
#include "tspd/environment.hpp"
#include "tspd/parameters.hpp"
#include "tspd/rng.hpp"

namespace tspd {

struct DecoderConfig {
  std::size_t hidden = 128;
  std::size_t layers = 1;
  double clip_init = 10.0;

  void validate() const;
};

/// demand, truck-here, drone-here, drone-busy.
inline constexpr std::size_t kDynamicFeatures = 4;

enum class CellKind { mgu, lstm, gru };

/// Trainable scalars of one recurrent cell with hidden size d_h and input d_in.
std::size_t recurrent_cell_parameters(CellKind kind, std::size_t d_h, std::size_t d_in);

void add_decoder_parameters(nn::ParameterSet& params, const DecoderConfig& cfg, const std::string& prefix,
                            SplitMix64& rng);

struct MguOutput {
  nn::Var r;
  nn::Var h;
};

/// f = sigmoid([h, x] W_f + b_f); c = tanh([f*h, x] W_h + b_h);
/// h' = (1 - f) * h + f * c; r = h'. `cell_prefix` names one layer.
MguOutput mgu_cell(nn::Tape& tape, const nn::ParameterSet& params, const std::string& cell_prefix, nn::Var x,
                   nn::Var h);

/// N x 4 dynamic node features of a state.
nn::Matrix dynamic_features(const State& state, const Instance& inst);

/// Static embeddings and their projection, fixed for one episode.
struct DecoderContext {
  nn::Var e_static;  // N x D_h
  nn::Var e_proj;    // N x D_h
};

DecoderContext prepare_decoder(nn::Tape& tape, const nn::ParameterSet& params, const std::string& prefix,
                               nn::Var e_static);

/// 1 x N logits C * tanh(v . tanh(e_i + q + d_i)), q = r W_q, d = dyn W_d.
nn::Var attention_logits(nn::Tape& tape, const nn::ParameterSet& params, const std::string& prefix,
                         const DecoderContext& ctx, const nn::Matrix& dynamic, nn::Var r);

enum class DecodeMode { greedy, sample };

struct Selection {
  int node = -1;
  double log_prob = 0.0;
};

/// Greedy picks the admissible argmax (lowest index on ties); sample draws one
/// uniform from rng and walks the cumulative distribution in index order.
/// Throws FeasibilityError for an empty mask.
Selection select_action(const nn::Matrix& logits, const Mask& mask, DecodeMode mode, SplitMix64* rng);

struct TapeSelection {
  Selection choice;
  nn::Var log_prob;  // 1 x 1
};

TapeSelection select_action(nn::Var logits, const Mask& mask, DecodeMode mode, SplitMix64* rng);

struct DecodeResult {
  Trajectory trajectory;
  /// Sum of the log-probabilities of every non-forced choice, 1 x 1.
  nn::Var log_prob_sum;
};

/// Rolls out one episode: per epoch the truck acts, the drone mask is rebuilt
/// from the truck's choice, the drone acts, and the environment steps. Both
/// phases share the recurrent state. Stops at the terminal state; throws
/// StateError if the horizon runs out first. A non-empty `forced` sequence
/// replaces the selections (log-probabilities are still computed for it).
DecodeResult decode_episode(nn::Tape& tape, const Instance& inst, const nn::ParameterSet& params,
                            const DecoderConfig& cfg, const std::string& prefix, nn::Var e_static, DecodeMode mode,
                            SplitMix64& rng, std::span<const JointAction> forced = {});

}  // namespace tspd
