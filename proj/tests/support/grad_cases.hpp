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

#include <limits>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "generators.hpp"
#include "tspd/critic.hpp"
#include "tspd/decoder.hpp"
#include "tspd/encoder.hpp"
#include "tspd/model.hpp"
#include "tspd/ops.hpp"

namespace tspd::testing {

struct GradCase {
  std::string name;
  nn::ParameterSet inputs;
  LossBuilder loss;
};

/// Reduces any node to a scalar with fixed pseudo-random weights, skipping
/// non-finite entries (masked log-probabilities).
inline nn::Var project(nn::Var out, std::uint64_t seed = 99) {
  const nn::Matrix& v = out.value();
  SplitMix64 rng(seed);
  const nn::Matrix w = random_matrix(rng, v.rows(), v.cols());
  bool finite = true;
  for (double x : v.data()) finite = finite && std::isfinite(x);
  if (finite) return nn::sum(nn::mul(out, out.tape->constant(w)));
  nn::Var acc = out.tape->constant(nn::Matrix::scalar(0.0));
  for (std::size_t r = 0; r < v.rows(); ++r) {
    for (std::size_t c = 0; c < v.cols(); ++c) {
      if (std::isfinite(v(r, c))) acc = nn::add(acc, nn::scale(nn::pick(out, r, c), w(r, c)));
    }
  }
  return acc;
}

namespace detail {

inline nn::ParameterSet inputs(SplitMix64& rng, std::initializer_list<std::pair<const char*, std::pair<int, int>>> shapes,
                               double margin = 0.0) {
  nn::ParameterSet p;
  for (const auto& [name, shape] : shapes) {
    p.add(name, random_matrix(rng, static_cast<std::size_t>(shape.first), static_cast<std::size_t>(shape.second), margin));
  }
  return p;
}

inline nn::Var in(nn::Tape& t, const nn::ParameterSet& p, const char* name) { return t.parameter(p, name); }

inline EncoderConfig tiny_encoder() {
  EncoderConfig c;
  c.hidden = 8;
  c.heads = 2;
  c.layers = 1;
  c.d_sparse = 4;
  c.ff_hidden = 16;
  return c;
}

}  // namespace detail

/// Tiny configuration used by the full-model gradient check.
inline ModelConfig tiny_model_config() {
  ModelConfig c = ModelConfig::with_hidden(8, 2, 1, 16);
  c.encoder.d_sparse = 4;
  c.decoder_layers = 1;
  return c;
}

/// One case per differentiable operation plus the attention, recurrent,
/// encoder and critic blocks.
inline std::vector<GradCase> op_grad_cases() {
  using detail::in;
  using detail::inputs;
  using nn::Var;
  SplitMix64 rng(2026);
  std::vector<GradCase> cases;
  auto unary = [&](const char* name, Var (*fn)(Var), double margin = 0.0) {
    cases.push_back({name, inputs(rng, {{"a", {3, 4}}}, margin),
                     [fn](nn::Tape& t, const nn::ParameterSet& p) { return project(fn(in(t, p, "a"))); }});
  };
  auto binary = [&](const char* name, Var (*fn)(Var, Var), std::pair<int, int> sa, std::pair<int, int> sb) {
    cases.push_back({name, inputs(rng, {{"a", sa}, {"b", sb}}), [fn](nn::Tape& t, const nn::ParameterSet& p) {
                       return project(fn(in(t, p, "a"), in(t, p, "b")));
                     }});
  };
  binary("matmul", nn::matmul, {3, 4}, {4, 2});
  binary("add", nn::add, {3, 4}, {3, 4});
  binary("sub", nn::sub, {3, 4}, {3, 4});
  binary("mul", nn::mul, {3, 4}, {3, 4});
  binary("add_row", nn::add_row, {3, 4}, {1, 4});
  binary("scale_by", nn::scale_by, {3, 4}, {1, 1});
  cases.push_back({"scale", inputs(rng, {{"a", {3, 4}}}),
                   [](nn::Tape& t, const nn::ParameterSet& p) { return project(nn::scale(in(t, p, "a"), -1.7)); }});
  unary("one_minus", nn::one_minus);
  unary("tanh", nn::tanh);
  unary("sigmoid", nn::sigmoid);
  unary("relu", nn::relu, 0.05);
  unary("transpose", nn::transpose);
  unary("mean_rows", nn::mean_rows);
  unary("max_rows", nn::max_rows, 0.05);
  unary("sum", nn::sum);
  cases.push_back({"concat_cols", inputs(rng, {{"a", {3, 2}}, {"b", {3, 3}}}), [](nn::Tape& t, const nn::ParameterSet& p) {
                     const Var parts[] = {in(t, p, "a"), in(t, p, "b")};
                     return project(nn::concat_cols(parts));
                   }});
  cases.push_back({"concat_rows", inputs(rng, {{"a", {2, 3}}, {"b", {1, 3}}}), [](nn::Tape& t, const nn::ParameterSet& p) {
                     const Var parts[] = {in(t, p, "a"), in(t, p, "b")};
                     return project(nn::concat_rows(parts));
                   }});
  cases.push_back({"slice_cols", inputs(rng, {{"a", {3, 5}}}),
                   [](nn::Tape& t, const nn::ParameterSet& p) { return project(nn::slice_cols(in(t, p, "a"), 1, 3)); }});
  cases.push_back({"slice_rows", inputs(rng, {{"a", {4, 3}}}),
                   [](nn::Tape& t, const nn::ParameterSet& p) { return project(nn::slice_rows(in(t, p, "a"), 1, 2)); }});
  cases.push_back({"gather_rows", inputs(rng, {{"a", {4, 3}}}), [](nn::Tape& t, const nn::ParameterSet& p) {
                     static const int rows[] = {2, 0, 2, 3};
                     return project(nn::gather_rows(in(t, p, "a"), rows));
                   }});
  cases.push_back({"broadcast_rows", inputs(rng, {{"a", {1, 3}}}),
                   [](nn::Tape& t, const nn::ParameterSet& p) { return project(nn::broadcast_rows(in(t, p, "a"), 4)); }});
  cases.push_back({"instance_norm", inputs(rng, {{"x", {5, 3}}, {"gamma", {1, 3}}, {"beta", {1, 3}}}),
                   [](nn::Tape& t, const nn::ParameterSet& p) {
                     return project(nn::instance_norm(in(t, p, "x"), in(t, p, "gamma"), in(t, p, "beta")));
                   }});
  const double inf = std::numeric_limits<double>::infinity();
  const nn::Matrix full_mask(3, 4, {0, -inf, 0, 0, 0, 0, 0, -inf, -inf, 0, 0, 0});
  const nn::Matrix row_mask = nn::Matrix::row({0, 0, -inf, 0});
  for (const auto& [label, mask] : {std::pair{"full", full_mask}, std::pair{"row", row_mask}}) {
    cases.push_back({std::string("masked_softmax/") + label, inputs(rng, {{"s", {3, 4}}}),
                     [mask](nn::Tape& t, const nn::ParameterSet& p) {
                       return project(nn::masked_softmax(in(t, p, "s"), mask));
                     }});
    cases.push_back({std::string("masked_log_softmax/") + label, inputs(rng, {{"s", {3, 4}}}),
                     [mask](nn::Tape& t, const nn::ParameterSet& p) {
                       return project(nn::masked_log_softmax(in(t, p, "s"), mask));
                     }});
  }
  cases.push_back({"gather_cols", inputs(rng, {{"a", {3, 5}}}), [](nn::Tape& t, const nn::ParameterSet& p) {
                     static const int index[] = {4, 0, 1, 1, 3, 2};
                     return project(nn::gather_cols(in(t, p, "a"), index, 2));
                   }});
  cases.push_back({"pick", inputs(rng, {{"a", {3, 4}}}),
                   [](nn::Tape& t, const nn::ParameterSet& p) { return nn::pick(in(t, p, "a"), 2, 1); }});

  // Graph attention, sparse and dense, on a 7-node instance.
  const Instance att_inst = random_instance(rng, 7);
  const std::size_t heads = 2, d_sparse = 4, dim = 6;
  const nn::Matrix h0 = random_matrix(rng, 7, dim);
  const ExpanderGraph graph = build_expander_graph(h0, att_inst.depot);
  const std::vector<int> buckets = relative_buckets(att_inst, d_sparse);
  for (const AttentionImpl impl : {AttentionImpl::sparse, AttentionImpl::dense}) {
    cases.push_back({impl == AttentionImpl::sparse ? "graph_attention/sparse" : "graph_attention/dense",
                     inputs(rng, {{"q", {8, 6}}, {"k", {8, 6}}, {"v", {8, 6}}, {"r", {8, 3}}}),
                     [=](nn::Tape& t, const nn::ParameterSet& p) {
                       auto fn = impl == AttentionImpl::sparse ? graph_attention : dense_graph_attention;
                       return project(fn(in(t, p, "q"), in(t, p, "k"), in(t, p, "v"), in(t, p, "r"), graph, buckets,
                                         heads, d_sparse, nullptr));
                     }});
  }

  cases.push_back({"mgu_cell",
                   inputs(rng, {{"x", {1, 4}}, {"h", {1, 4}}, {"c.W_f", {8, 4}}, {"c.b_f", {1, 4}}, {"c.W_h", {8, 4}},
                                {"c.b_h", {1, 4}}}),
                   [](nn::Tape& t, const nn::ParameterSet& p) {
                     return project(mgu_cell(t, p, "c.", in(t, p, "x"), in(t, p, "h")).h);
                   }});

  {
    nn::ParameterSet enc;
    SplitMix64 init(7);
    const EncoderConfig ec = detail::tiny_encoder();
    add_encoder_parameters(enc, ec, "e.", init);
    const Instance inst = random_instance(rng, 6);
    cases.push_back({"encode", enc, [ec, inst](nn::Tape& t, const nn::ParameterSet& p) {
                       return project(encode(t, inst, p, ec, "e.").e_static);
                     }});
    nn::ParameterSet critic = enc;
    const CriticConfig cc{8, 2};
    add_critic_head_parameters(critic, cc, ec.hidden, "c.", init);
    cases.push_back({"critic_value", critic, [ec, cc, inst](nn::Tape& t, const nn::ParameterSet& p) {
                       return critic_value(t, encode(t, inst, p, ec, "e.").e_static, p, cc, "c.");
                     }});
  }
  return cases;
}

/// Actor log-probability of a fixed sampled trajectory plus the critic
/// estimate, on N = 5 with D_h = 8, H = 2, L = 1 and one decoder layer.
inline GradCase tiny_model_case(std::uint64_t seed = 1) {
  const ModelConfig cfg = tiny_model_config();
  const Model model = init_model(cfg, seed);
  const Instance inst = generate_instances(5, 1, 3, Family::random_corner_depot).instances[0];
  std::vector<JointAction> forced;
  {
    nn::Tape tape(false);
    SplitMix64 rng(9);
    for (const TrajectoryStep& s : run_actor(tape, model, inst, DecodeMode::sample, rng).trajectory.steps) {
      forced.push_back(s.action);
    }
  }
  nn::ParameterSet all = model.actor;
  for (std::size_t i = 0; i < model.critic.size(); ++i) all.add(model.critic.name(i), model.critic.at(i));
  return {"tiny_model", all, [cfg, inst, forced](nn::Tape& t, const nn::ParameterSet& p) {
            EncoderOutput enc = encode(t, inst, p, cfg.encoder, kActorEncoder);
            SplitMix64 unused(0);
            DecodeResult d =
                decode_episode(t, inst, p, cfg.decoder(), kActorDecoder, enc.e_static, DecodeMode::greedy, unused, forced);
            EncoderOutput cenc = encode(t, inst, p, cfg.encoder, kCriticEncoder);
            nn::Var v = critic_value(t, cenc.e_static, p, cfg.critic, kCriticHead);
            return nn::add(d.log_prob_sum, v);
          }};
}

}  // namespace tspd::testing
