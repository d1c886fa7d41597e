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

#include "tspd/model.hpp"

#include <charconv>

#include "tspd/error.hpp"
#include "tspd/ops.hpp"

namespace tspd {

ModelConfig ModelConfig::with_hidden(std::size_t hidden, std::size_t heads, std::size_t layers, std::size_t ff_hidden) {
  ModelConfig c;
  c.encoder.hidden = hidden;
  c.encoder.heads = heads;
  c.encoder.layers = layers;
  c.encoder.ff_hidden = ff_hidden;
  c.critic.width = hidden;
  return c;
}

void ModelConfig::validate() const {
  encoder.validate();
  decoder().validate();
  critic.validate();
}

std::map<std::string, std::string> ModelConfig::to_map() const {
  return {
      {"encoder.hidden", std::to_string(encoder.hidden)},
      {"encoder.heads", std::to_string(encoder.heads)},
      {"encoder.layers", std::to_string(encoder.layers)},
      {"encoder.d_sparse", std::to_string(encoder.d_sparse)},
      {"encoder.ff_hidden", std::to_string(encoder.ff_hidden)},
      {"encoder.hierarchical", encoder.hierarchical ? "1" : "0"},
      {"decoder.layers", std::to_string(decoder_layers)},
      {"decoder.clip_init", format_number(clip_init)},
      {"critic.width", std::to_string(critic.width)},
      {"critic.depth", std::to_string(critic.depth)},
      {"dtype", "f64"},
  };
}

namespace {

const std::string& need(const std::map<std::string, std::string>& m, const std::string& key) {
  auto it = m.find(key);
  if (it == m.end()) throw LoadError("model config: missing key " + key);
  return it->second;
}

std::size_t need_size(const std::map<std::string, std::string>& m, const std::string& key) {
  const std::string& s = need(m, key);
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw LoadError("model config: bad value for " + key);
  return v;
}

}  // namespace

ModelConfig ModelConfig::from_map(const std::map<std::string, std::string>& m) {
  ModelConfig c;
  c.encoder.hidden = need_size(m, "encoder.hidden");
  c.encoder.heads = need_size(m, "encoder.heads");
  c.encoder.layers = need_size(m, "encoder.layers");
  c.encoder.d_sparse = need_size(m, "encoder.d_sparse");
  c.encoder.ff_hidden = need_size(m, "encoder.ff_hidden");
  c.encoder.hierarchical = need_size(m, "encoder.hierarchical") != 0;
  c.decoder_layers = need_size(m, "decoder.layers");
  const std::string& clip = need(m, "decoder.clip_init");
  auto [p, ec] = std::from_chars(clip.data(), clip.data() + clip.size(), c.clip_init);
  if (ec != std::errc() || p != clip.data() + clip.size()) throw LoadError("model config: bad value for decoder.clip_init");
  c.critic.width = need_size(m, "critic.width");
  c.critic.depth = need_size(m, "critic.depth");
  if (need(m, "dtype") != "f64") throw LoadError("model config: unsupported dtype");
  try {
    c.validate();
  } catch (const ArgumentError& e) {
    throw LoadError(std::string("model config: ") + e.what());
  }
  return c;
}

Model init_model(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Model m{cfg, {}, {}};
  SplitMix64 actor_rng(mix_seed(seed, 1));
  add_encoder_parameters(m.actor, cfg.encoder, kActorEncoder, actor_rng);
  add_decoder_parameters(m.actor, cfg.decoder(), kActorDecoder, actor_rng);
  SplitMix64 critic_rng(mix_seed(seed, 2));
  add_encoder_parameters(m.critic, cfg.encoder, kCriticEncoder, critic_rng);
  add_critic_head_parameters(m.critic, cfg.critic, cfg.encoder.hidden, kCriticHead, critic_rng);
  return m;
}

namespace {

void require_layout(const nn::ParameterSet& expected, const nn::ParameterSet& got, const char* what) {
  if (expected.size() != got.size()) {
    throw LoadError(std::string(what) + ": expected " + std::to_string(expected.size()) + " tensors, found " +
                    std::to_string(got.size()));
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const std::string& name = expected.name(i);
    if (!got.contains(name)) throw LoadError(std::string(what) + ": missing tensor " + name);
    const auto& a = expected.at(i);
    const auto& b = got.get(name);
    if (!a.same_shape(b)) {
      throw LoadError(std::string(what) + ": tensor " + name + " has shape " + std::to_string(b.rows()) + "x" +
                      std::to_string(b.cols()) + ", expected " + std::to_string(a.rows()) + "x" +
                      std::to_string(a.cols()));
    }
  }
}

}  // namespace

void validate_shapes(const Model& model) {
  const Model ref = init_model(model.config, 0);
  require_layout(ref.actor, model.actor, "actor");
  require_layout(ref.critic, model.critic, "critic");
}

nn::Checkpoint to_checkpoint(const Model& model, const std::map<std::string, std::string>& info) {
  nn::Checkpoint c;
  c.config = model.config.to_map();
  c.info = info;
  for (std::size_t i = 0; i < model.actor.size(); ++i) c.params.add(model.actor.name(i), model.actor.at(i));
  for (std::size_t i = 0; i < model.critic.size(); ++i) c.params.add(model.critic.name(i), model.critic.at(i));
  return c;
}

Model from_checkpoint(const nn::Checkpoint& ckpt) {
  Model m;
  m.config = ModelConfig::from_map(ckpt.config);
  const Model ref = init_model(m.config, 0);
  for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
    const std::string& name = ckpt.params.name(i);
    if (ref.actor.contains(name)) {
      m.actor.add(name, ckpt.params.at(i));
    } else if (ref.critic.contains(name)) {
      m.critic.add(name, ckpt.params.at(i));
    } else {
      throw LoadError("checkpoint: unexpected tensor " + name);
    }
  }
  nn::ParameterSet actor, critic;
  require_layout(ref.actor, m.actor, "actor");
  require_layout(ref.critic, m.critic, "critic");
  for (std::size_t i = 0; i < ref.actor.size(); ++i) actor.add(ref.actor.name(i), m.actor.get(ref.actor.name(i)));
  for (std::size_t i = 0; i < ref.critic.size(); ++i) critic.add(ref.critic.name(i), m.critic.get(ref.critic.name(i)));
  m.actor = std::move(actor);
  m.critic = std::move(critic);
  return m;
}

void save_model(const std::filesystem::path& path, const Model& model, const std::map<std::string, std::string>& info) {
  nn::save_checkpoint(path, to_checkpoint(model, info));
}

Model load_model(const std::filesystem::path& path) { return from_checkpoint(nn::load_checkpoint(path)); }

DecodeResult run_actor(nn::Tape& tape, const Model& model, const Instance& inst, DecodeMode mode, SplitMix64& rng) {
  EncoderOutput enc = encode(tape, inst, model.actor, model.config.encoder, kActorEncoder);
  return decode_episode(tape, inst, model.actor, model.config.decoder(), kActorDecoder, enc.e_static, mode, rng);
}

nn::Var predict_cost(nn::Tape& tape, const Model& model, const Instance& inst) {
  EncoderOutput enc = encode(tape, inst, model.critic, model.config.encoder, kCriticEncoder);
  nn::Var v = critic_value(tape, enc.e_static, model.critic, model.config.critic, kCriticHead);
  return nn::scale(v, coordinate_scale(inst));
}

Trajectory solve_greedy(const Model& model, const Instance& inst) {
  nn::Tape tape(false);
  SplitMix64 rng(0);
  return run_actor(tape, model, inst, DecodeMode::greedy, rng).trajectory;
}

Trajectory solve_sampled(const Model& model, const Instance& inst, std::uint64_t seed) {
  nn::Tape tape(false);
  SplitMix64 rng(seed);
  return run_actor(tape, model, inst, DecodeMode::sample, rng).trajectory;
}

}  // namespace tspd
