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

#include "tspd/decoder.hpp"

#include <cmath>
#include <limits>

#include "tspd/error.hpp"
#include "tspd/ops.hpp"

namespace tspd {

using nn::Matrix;
using nn::Tape;
using nn::Var;

void DecoderConfig::validate() const {
  if (hidden == 0) throw ArgumentError("decoder: hidden size must be positive");
  if (layers == 0) throw ArgumentError("decoder: at least one layer required");
}

std::size_t recurrent_cell_parameters(CellKind kind, std::size_t d_h, std::size_t d_in) {
  const std::size_t gate = (d_h + d_in + 1) * d_h;
  switch (kind) {
    case CellKind::mgu: return 2 * gate;
    case CellKind::lstm: return 4 * gate;
    case CellKind::gru: return 3 * gate;
  }
  return 0;
}

namespace {

std::string cell_prefix(const std::string& prefix, std::size_t l) { return prefix + "mgu" + std::to_string(l) + "."; }

}  // namespace

void add_decoder_parameters(nn::ParameterSet& params, const DecoderConfig& cfg, const std::string& prefix,
                            SplitMix64& rng) {
  cfg.validate();
  const std::size_t d = cfg.hidden;
  params.add(prefix + "agent_embed", nn::uniform_init(2, d, d, rng));
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    const std::string p = cell_prefix(prefix, l);
    params.add(p + "W_f", nn::uniform_init(2 * d, d, 2 * d, rng));
    params.add(p + "b_f", Matrix(1, d));
    params.add(p + "W_h", nn::uniform_init(2 * d, d, 2 * d, rng));
    params.add(p + "b_h", Matrix(1, d));
  }
  params.add(prefix + "W_e", nn::uniform_init(d, d, d, rng));
  params.add(prefix + "W_q", nn::uniform_init(d, d, d, rng));
  params.add(prefix + "W_d", nn::uniform_init(kDynamicFeatures, d, kDynamicFeatures, rng));
  params.add(prefix + "v", nn::uniform_init(d, 1, d, rng));
  params.add(prefix + "C", Matrix::scalar(cfg.clip_init));
}

MguOutput mgu_cell(Tape& tape, const nn::ParameterSet& params, const std::string& p, Var x, Var h) {
  Var f = nn::sigmoid(nn::add_row(nn::matmul(nn::concat_cols(std::vector<Var>{h, x}), tape.parameter(params, p + "W_f")),
                                  tape.parameter(params, p + "b_f")));
  Var c = nn::tanh(
      nn::add_row(nn::matmul(nn::concat_cols(std::vector<Var>{nn::mul(f, h), x}), tape.parameter(params, p + "W_h")),
                  tape.parameter(params, p + "b_h")));
  Var next = nn::add(nn::mul(nn::one_minus(f), h), nn::mul(f, c));
  return {next, next};
}

Matrix dynamic_features(const State& state, const Instance& inst) {
  Matrix f(inst.size(), kDynamicFeatures);
  for (std::size_t i = 0; i < static_cast<std::size_t>(inst.size()); ++i) {
    f(i, 0) = state.demand[i] != 0 ? 1.0 : 0.0;
    f(i, 1) = static_cast<std::size_t>(state.truck_loc) == i ? 1.0 : 0.0;
    f(i, 2) = static_cast<std::size_t>(state.drone_loc) == i ? 1.0 : 0.0;
    f(i, 3) = state.drone_busy ? 1.0 : 0.0;
  }
  return f;
}

DecoderContext prepare_decoder(Tape& tape, const nn::ParameterSet& params, const std::string& prefix, Var e_static) {
  return {e_static, nn::matmul(e_static, tape.parameter(params, prefix + "W_e"))};
}

Var attention_logits(Tape& tape, const nn::ParameterSet& params, const std::string& prefix, const DecoderContext& ctx,
                     const Matrix& dynamic, Var r) {
  const std::size_t n = tape.value(ctx.e_proj).rows();
  if (dynamic.rows() != n || dynamic.cols() != kDynamicFeatures) throw ArgumentError("decoder: dynamic feature shape");
  Var q = nn::matmul(r, tape.parameter(params, prefix + "W_q"));
  Var d = nn::matmul(tape.constant(dynamic), tape.parameter(params, prefix + "W_d"));
  Var hidden = nn::tanh(nn::add(nn::add(ctx.e_proj, nn::broadcast_rows(q, n)), d));
  Var u = nn::transpose(nn::matmul(hidden, tape.parameter(params, prefix + "v")));
  return nn::scale_by(nn::tanh(u), tape.parameter(params, prefix + "C"));
}

namespace {

int choose(const Matrix& log_probs, const Mask& mask, DecodeMode mode, SplitMix64* rng) {
  int best = -1;
  if (mode == DecodeMode::greedy) {
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (mask[i] != 0 && (best < 0 || log_probs[i] > log_probs[static_cast<std::size_t>(best)])) best = static_cast<int>(i);
    }
    return best;
  }
  if (rng == nullptr) throw ArgumentError("sampling requires a random generator");
  const double u = rng->uniform();
  double cum = 0.0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] == 0) continue;
    best = static_cast<int>(i);
    cum += std::exp(log_probs[i]);
    if (u < cum) break;
  }
  return best;
}

void check_selectable(std::size_t cols, const Mask& mask) {
  if (cols != mask.size()) throw ArgumentError("select_action: logits and mask sizes differ");
  bool any = false;
  for (auto b : mask) any = any || b != 0;
  if (!any) throw FeasibilityError("select_action: empty mask");
}

Matrix plain_log_softmax(const Matrix& logits, const Mask& mask) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] != 0) mx = std::max(mx, logits[i]);
  }
  double z = 0.0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] != 0) z += std::exp(logits[i] - mx);
  }
  const double lse = mx + std::log(z);
  Matrix out(1, mask.size(), -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] != 0) out[i] = logits[i] - lse;
  }
  return out;
}

}  // namespace

Selection select_action(const Matrix& logits, const Mask& mask, DecodeMode mode, SplitMix64* rng) {
  check_selectable(logits.size(), mask);
  const Matrix lp = plain_log_softmax(logits, mask);
  const int node = choose(lp, mask, mode, rng);
  return {node, lp[static_cast<std::size_t>(node)]};
}

TapeSelection select_action(Var logits, const Mask& mask, DecodeMode mode, SplitMix64* rng) {
  Tape& t = *logits.tape;
  check_selectable(t.value(logits).cols(), mask);
  Var lp = nn::masked_log_softmax(logits, nn::additive_mask(mask));
  const int node = choose(t.value(lp), mask, mode, rng);
  Var picked = nn::pick(lp, 0, static_cast<std::size_t>(node));
  return {{node, t.value(picked)[0]}, picked};
}

DecodeResult decode_episode(Tape& tape, const Instance& inst, const nn::ParameterSet& params, const DecoderConfig& cfg,
                            const std::string& prefix, Var e_static, DecodeMode mode, SplitMix64& rng,
                            std::span<const JointAction> forced) {
  cfg.validate();
  const DecoderContext ctx = prepare_decoder(tape, params, prefix, e_static);
  Var agent_embed = tape.parameter(params, prefix + "agent_embed");
  std::vector<Var> hidden;
  for (std::size_t l = 0; l < cfg.layers; ++l) hidden.push_back(tape.constant(Matrix(1, cfg.hidden)));

  std::vector<Var> chosen_log_probs;
  int last[2] = {inst.depot, inst.depot};

  auto act = [&](Agent agent, const State& s, const Mask& mask, int force) -> Selection {
    const int a = agent == Agent::truck ? 0 : 1;
    Var x = nn::add(nn::gather_rows(e_static, std::vector<int>{last[a]}),
                    nn::gather_rows(agent_embed, std::vector<int>{a}));
    for (std::size_t l = 0; l < cfg.layers; ++l) {
      MguOutput o = mgu_cell(tape, params, cell_prefix(prefix, l), x, hidden[l]);
      hidden[l] = o.h;
      x = o.r;
    }
    int open = 0, only = -1;
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (mask[i] != 0) {
        ++open;
        only = static_cast<int>(i);
      }
    }
    if (open == 0) throw FeasibilityError("decoder: empty mask");
    if (force >= 0 && (static_cast<std::size_t>(force) >= mask.size() || mask[static_cast<std::size_t>(force)] == 0)) {
      throw FeasibilityError("decoder: forced action " + std::to_string(force) + " is masked");
    }
    if (open == 1) {
      last[a] = only;
      return {only, 0.0};
    }
    Var logits = attention_logits(tape, params, prefix, ctx, dynamic_features(s, inst), x);
    Selection choice;
    if (force >= 0) {
      Var lp = nn::masked_log_softmax(logits, nn::additive_mask(mask));
      Var picked = nn::pick(lp, 0, static_cast<std::size_t>(force));
      chosen_log_probs.push_back(picked);
      choice = {force, tape.value(picked)[0]};
    } else {
      TapeSelection sel = select_action(logits, mask, mode, &rng);
      chosen_log_probs.push_back(sel.log_prob);
      choice = sel.choice;
    }
    last[a] = choice.node;
    return choice;
  };

  DecodeResult res;
  Trajectory& traj = res.trajectory;
  traj.depot = inst.depot;
  State s = reset(inst).first;
  const int limit = horizon(inst);
  for (int t = 0; t < limit && !is_terminal(s, inst); ++t) {
    const bool replaying = static_cast<std::size_t>(t) < forced.size();
    if (!forced.empty() && !replaying) throw StateError("decoder: forced actions end before the episode terminates");
    const JointAction f = replaying ? forced[static_cast<std::size_t>(t)] : JointAction{-1, -1};
    const Selection truck = act(Agent::truck, s, action_masks(s, inst, Phase::truck), f.truck);
    const Selection drone = act(Agent::drone, s, action_masks(s, inst, Phase::drone, truck.node), f.drone);
    const JointAction a{truck.node, drone.node};
    StepResult next = step(s, a, inst);
    traj.steps.push_back({s, a, next.dt, truck.log_prob, drone.log_prob});
    traj.total_cost += next.dt;
    s = std::move(next.next);
  }
  if (!is_terminal(s, inst)) throw StateError("decoder: horizon exhausted before the episode terminated");
  traj.final_state = s;

  if (chosen_log_probs.empty()) {
    res.log_prob_sum = tape.constant(Matrix::scalar(0.0));
  } else {
    res.log_prob_sum = nn::sum(nn::concat_cols(chosen_log_probs));
  }
  return res;
}

}  // namespace tspd
