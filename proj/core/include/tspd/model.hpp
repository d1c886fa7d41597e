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
#include <filesystem>
#include <map>
#include <string>

#include "tspd/checkpoint.hpp"
#include "tspd/critic.hpp"
#include "tspd/decoder.hpp"
#include "tspd/encoder.hpp"
#include "tspd/parameters.hpp"

namespace tspd {

inline const std::string kActorEncoder = "actor.enc.";
inline const std::string kActorDecoder = "actor.dec.";
inline const std::string kCriticEncoder = "critic.enc.";
inline const std::string kCriticHead = "critic.head.";

struct ModelConfig {
  EncoderConfig encoder;
  std::size_t decoder_layers = 1;
  double clip_init = 10.0;
  CriticConfig critic;

  /// Defaults with every width tied to `hidden`.
  static ModelConfig with_hidden(std::size_t hidden, std::size_t heads, std::size_t layers, std::size_t ff_hidden);

  DecoderConfig decoder() const { return {encoder.hidden, decoder_layers, clip_init}; }
  void validate() const;

  std::map<std::string, std::string> to_map() const;
  /// Throws LoadError on missing or malformed keys.
  static ModelConfig from_map(const std::map<std::string, std::string>& m);

  friend bool operator==(const ModelConfig& a, const ModelConfig& b) { return a.to_map() == b.to_map(); }
};

/// Actor (encoder + decoder) and critic (own encoder + head) parameters.
struct Model {
  ModelConfig config;
  nn::ParameterSet actor;
  nn::ParameterSet critic;
};

Model init_model(const ModelConfig& cfg, std::uint64_t seed);

/// Throws LoadError if the tensors do not match the layout the config implies.
void validate_shapes(const Model& model);

nn::Checkpoint to_checkpoint(const Model& model, const std::map<std::string, std::string>& info = {});
Model from_checkpoint(const nn::Checkpoint& ckpt);

void save_model(const std::filesystem::path& path, const Model& model,
                const std::map<std::string, std::string>& info = {});
Model load_model(const std::filesystem::path& path);

/// Encodes with the actor encoder and decodes one episode.
DecodeResult run_actor(nn::Tape& tape, const Model& model, const Instance& inst, DecodeMode mode, SplitMix64& rng);

/// Critic estimate in cost units: coordinate_scale(inst) * critic_value.
nn::Var predict_cost(nn::Tape& tape, const Model& model, const Instance& inst);

/// Plain greedy solve without gradient bookkeeping.
Trajectory solve_greedy(const Model& model, const Instance& inst);
/// Plain sampled solve on its own seed.
Trajectory solve_sampled(const Model& model, const Instance& inst, std::uint64_t seed);

}  // namespace tspd
