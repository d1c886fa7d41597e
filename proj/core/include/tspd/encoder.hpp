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
#include "tspd/graph.hpp"
#include "tspd/instances.hpp"
#include "tspd/parameters.hpp"
#include "tspd/rng.hpp"

namespace tspd {

struct EncoderConfig {
  std::size_t hidden = 128;
  std::size_t heads = 8;
  std::size_t layers = 3;
  std::size_t d_sparse = 16;
  std::size_t ff_hidden = 512;
  bool hierarchical = true;

  std::size_t head_dim() const noexcept { return hidden / heads; }
  /// Throws ArgumentError on an inconsistent configuration.
  void validate() const;
};

inline constexpr std::size_t kNodeFeatures = 3;

enum class AttentionImpl { sparse, dense };

struct EncodeOptions {
  AttentionImpl attention = AttentionImpl::sparse;
  /// Keep dense (N+1) x (N+1) attention weights for every layer and head.
  bool record_attention = false;
};

struct EncoderOutput {
  nn::Var e_static;        // N x D_h
  nn::Var h_final;         // (N+1) x D_h, before multi-scale fusion
  nn::Var p_multi_scale;   // 1 x D_h
  ExpanderGraph graph;
  /// attention[layer * heads + head], filled when requested.
  std::vector<nn::Matrix> attention;
};

/// Adds every encoder tensor under `prefix`.
void add_encoder_parameters(nn::ParameterSet& params, const EncoderConfig& cfg, const std::string& prefix,
                            SplitMix64& rng);

/// Per-node (x / scale, y / scale, is_depot), scale = coordinate_scale(inst).
nn::Matrix node_features(const Instance& inst);

/// h = features * W_in + b_in.
nn::Var embed_inputs(nn::Tape& tape, const nn::ParameterSet& params, const std::string& prefix, nn::Var features);

/// Multi-head attention restricted to graph edges. q, k, v are (N+1) x D with
/// heads laid out in consecutive column blocks; r is (heads * d_sparse) x D/heads.
/// Score(i, j) = q_i.k_j / sqrt(d) + q_i.r[head, bucket(i, j)].
nn::Var graph_attention(nn::Var q, nn::Var k, nn::Var v, nn::Var r, const ExpanderGraph& graph,
                        std::span<const int> buckets, std::size_t heads, std::size_t d_sparse,
                        std::vector<nn::Matrix>* weights = nullptr);

/// Same result through dense masked softmax over the full (N+1) x (N+1) grid.
nn::Var dense_graph_attention(nn::Var q, nn::Var k, nn::Var v, nn::Var r, const ExpanderGraph& graph,
                              std::span<const int> buckets, std::size_t heads, std::size_t d_sparse,
                              std::vector<nn::Matrix>* weights = nullptr);

/// One attention + feed-forward block over (N+1) rows, after the global-node
/// refresh. `layer` selects the parameter block.
nn::Var ega_layer(nn::Tape& tape, const nn::ParameterSet& params, const std::string& prefix, nn::Var h,
                  const ExpanderGraph& graph, std::span<const int> buckets, const EncoderConfig& cfg,
                  std::size_t layer, const EncodeOptions& opts = {}, std::vector<nn::Matrix>* weights = nullptr);

EncoderOutput encode(nn::Tape& tape, const Instance& inst, const nn::ParameterSet& params, const EncoderConfig& cfg,
                     const std::string& prefix, const EncodeOptions& opts = {});

}  // namespace tspd
