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

#include "tspd/encoder.hpp"

#include <cmath>
#include <limits>
#include <memory>

#include "tspd/error.hpp"
#include "tspd/ops.hpp"

namespace tspd {

using nn::Matrix;
using nn::Tape;
using nn::Var;

void EncoderConfig::validate() const {
  if (hidden == 0 || heads == 0 || hidden % heads != 0) throw ArgumentError("encoder: hidden size must be divisible by heads");
  if (layers == 0) throw ArgumentError("encoder: at least one layer required");
  if (d_sparse == 0) throw ArgumentError("encoder: d_sparse must be positive");
  if (ff_hidden == 0) throw ArgumentError("encoder: ff_hidden must be positive");
}

namespace {

std::string layer_prefix(const std::string& prefix, std::size_t l) { return prefix + "layer" + std::to_string(l) + "."; }

}  // namespace

void add_encoder_parameters(nn::ParameterSet& params, const EncoderConfig& cfg, const std::string& prefix,
                            SplitMix64& rng) {
  cfg.validate();
  const std::size_t d = cfg.hidden;
  params.add(prefix + "W_in", nn::uniform_init(kNodeFeatures, d, kNodeFeatures, rng));
  params.add(prefix + "b_in", Matrix(1, d));
  params.add(prefix + "global", nn::uniform_init(1, d, d, rng));
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    const std::string p = layer_prefix(prefix, l);
    params.add(p + "W_q", nn::uniform_init(d, d, d, rng));
    params.add(p + "W_k", nn::uniform_init(d, d, d, rng));
    params.add(p + "W_v", nn::uniform_init(d, d, d, rng));
    params.add(p + "R", nn::uniform_init(cfg.heads * cfg.d_sparse, cfg.head_dim(), cfg.head_dim(), rng));
    params.add(p + "W_o", nn::uniform_init(d, d, d, rng));
    params.add(p + "norm1.gamma", Matrix(1, d, 1.0));
    params.add(p + "norm1.beta", Matrix(1, d));
    params.add(p + "W_ff1", nn::uniform_init(d, cfg.ff_hidden, d, rng));
    params.add(p + "b_ff1", Matrix(1, cfg.ff_hidden));
    params.add(p + "W_ff2", nn::uniform_init(cfg.ff_hidden, d, cfg.ff_hidden, rng));
    params.add(p + "norm2.gamma", Matrix(1, d, 1.0));
    params.add(p + "norm2.beta", Matrix(1, d));
  }
}

Matrix node_features(const Instance& inst) {
  const double s = coordinate_scale(inst);
  Matrix f(inst.size(), kNodeFeatures);
  for (std::size_t i = 0; i < static_cast<std::size_t>(inst.size()); ++i) {
    f(i, 0) = inst.coords[i].x / s;
    f(i, 1) = inst.coords[i].y / s;
    f(i, 2) = i == static_cast<std::size_t>(inst.depot) ? 1.0 : 0.0;
  }
  return f;
}

Var embed_inputs(Tape& tape, const nn::ParameterSet& params, const std::string& prefix, Var features) {
  return nn::add_row(nn::matmul(features, tape.parameter(params, prefix + "W_in")),
                     tape.parameter(params, prefix + "b_in"));
}

namespace {

void check_attention_inputs(const Matrix& q, const Matrix& k, const Matrix& v, const Matrix& r, const ExpanderGraph& g,
                            std::span<const int> buckets, std::size_t heads, std::size_t d_sparse) {
  const std::size_t m = g.size();
  if (q.rows() != m || k.rows() != m || v.rows() != m) throw ArgumentError("attention: row count must be N+1");
  if (!q.same_shape(k) || !q.same_shape(v)) throw ArgumentError("attention: q, k, v shapes differ");
  if (heads == 0 || q.cols() % heads != 0) throw ArgumentError("attention: width not divisible by heads");
  if (r.rows() != heads * d_sparse || r.cols() != q.cols() / heads) throw ArgumentError("attention: R shape");
  if (buckets.size() != m * m) throw ArgumentError("attention: bucket table size");
}

const double* at(const Matrix& m, std::size_t r, std::size_t c) { return m.data().data() + r * m.cols() + c; }

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

Var graph_attention(Var q, Var k, Var v, Var r, const ExpanderGraph& graph, std::span<const int> buckets,
                    std::size_t heads, std::size_t d_sparse, std::vector<Matrix>* weights) {
  Tape& t = *q.tape;
  const Matrix& qv = t.value(q);
  const Matrix& kv = t.value(k);
  const Matrix& vv = t.value(v);
  const Matrix& rv = t.value(r);
  check_attention_inputs(qv, kv, vv, rv, graph, buckets, heads, d_sparse);
  const std::size_t m = graph.size();
  const std::size_t width = qv.cols();
  const std::size_t dk = width / heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dk));

  // attn[h][i] aligned with graph.neighbors[i].
  auto attn = std::make_shared<std::vector<std::vector<double>>>(heads * m);
  Matrix out(m, width);
  for (std::size_t h = 0; h < heads; ++h) {
    const std::size_t off = h * dk;
    for (std::size_t i = 0; i < m; ++i) {
      const auto& nb = graph.neighbors[i];
      auto& a = (*attn)[h * m + i];
      a.resize(nb.size());
      const double* qi = at(qv, i, off);
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t e = 0; e < nb.size(); ++e) {
        const auto j = static_cast<std::size_t>(nb[e]);
        const auto b = static_cast<std::size_t>(buckets[i * m + j]);
        a[e] = dot(qi, at(kv, j, off), dk) * inv_sqrt + dot(qi, at(rv, h * d_sparse + b, 0), dk);
        mx = std::max(mx, a[e]);
      }
      double z = 0.0;
      for (double& x : a) {
        x = std::exp(x - mx);
        z += x;
      }
      for (double& x : a) x /= z;
      double* oi = &out(i, off);
      for (std::size_t e = 0; e < nb.size(); ++e) {
        const double* vj = at(vv, static_cast<std::size_t>(nb[e]), off);
        for (std::size_t c = 0; c < dk; ++c) oi[c] += a[e] * vj[c];
      }
    }
  }
  if (weights != nullptr) {
    for (std::size_t h = 0; h < heads; ++h) {
      Matrix w(m, m);
      for (std::size_t i = 0; i < m; ++i) {
        const auto& nb = graph.neighbors[i];
        for (std::size_t e = 0; e < nb.size(); ++e) w(i, static_cast<std::size_t>(nb[e])) = (*attn)[h * m + i][e];
      }
      weights->push_back(std::move(w));
    }
  }

  const bool rg = t.requires_grad(q) || t.requires_grad(k) || t.requires_grad(v) || t.requires_grad(r);
  if (!rg) return t.record(std::move(out), false, nullptr);
  auto nbrs = std::make_shared<std::vector<std::vector<int>>>(graph.neighbors);
  std::vector<int> bk(buckets.begin(), buckets.end());
  return t.record(std::move(out), true, [=, bk = std::move(bk)](Tape& tp, const Matrix& g) {
    const Matrix& qv2 = tp.value(q);
    const Matrix& kv2 = tp.value(k);
    const Matrix& vv2 = tp.value(v);
    const Matrix& rv2 = tp.value(r);
    Matrix dq(m, width), dk_(m, width), dv(m, width), dr(rv2.rows(), rv2.cols());
    std::vector<double> da;
    for (std::size_t h = 0; h < heads; ++h) {
      const std::size_t off = h * dk;
      for (std::size_t i = 0; i < m; ++i) {
        const auto& nb = (*nbrs)[i];
        const auto& a = (*attn)[h * m + i];
        const double* gi = at(g, i, off);
        da.assign(nb.size(), 0.0);
        double total = 0.0;
        for (std::size_t e = 0; e < nb.size(); ++e) {
          const auto j = static_cast<std::size_t>(nb[e]);
          da[e] = dot(gi, at(vv2, j, off), dk);
          total += a[e] * da[e];
          double* dvj = &dv(j, off);
          for (std::size_t c = 0; c < dk; ++c) dvj[c] += a[e] * gi[c];
        }
        const double* qi = at(qv2, i, off);
        double* dqi = &dq(i, off);
        for (std::size_t e = 0; e < nb.size(); ++e) {
          const double ds = a[e] * (da[e] - total);
          if (ds == 0.0) continue;
          const auto j = static_cast<std::size_t>(nb[e]);
          const std::size_t row = h * d_sparse + static_cast<std::size_t>(bk[i * m + j]);
          const double* kj = at(kv2, j, off);
          const double* rb = at(rv2, row, 0);
          double* dkj = &dk_(j, off);
          double* drb = &dr(row, 0);
          for (std::size_t c = 0; c < dk; ++c) {
            dqi[c] += ds * (kj[c] * inv_sqrt + rb[c]);
            dkj[c] += ds * qi[c] * inv_sqrt;
            drb[c] += ds * qi[c];
          }
        }
      }
    }
    tp.accumulate(q, dq);
    tp.accumulate(k, dk_);
    tp.accumulate(v, dv);
    tp.accumulate(r, dr);
  });
}

Var dense_graph_attention(Var q, Var k, Var v, Var r, const ExpanderGraph& graph, std::span<const int> buckets,
                          std::size_t heads, std::size_t d_sparse, std::vector<Matrix>* weights) {
  Tape& t = *q.tape;
  check_attention_inputs(t.value(q), t.value(k), t.value(v), t.value(r), graph, buckets, heads, d_sparse);
  const std::size_t m = graph.size();
  const std::size_t dk = t.value(q).cols() / heads;
  const Matrix mask = graph.additive_mask();
  std::vector<Var> outs;
  for (std::size_t h = 0; h < heads; ++h) {
    Var qh = nn::slice_cols(q, h * dk, dk);
    Var kh = nn::slice_cols(k, h * dk, dk);
    Var vh = nn::slice_cols(v, h * dk, dk);
    Var rh = nn::slice_rows(r, h * d_sparse, d_sparse);
    Var content = nn::scale(nn::matmul(qh, nn::transpose(kh)), 1.0 / std::sqrt(static_cast<double>(dk)));
    Var position = nn::gather_cols(nn::matmul(qh, nn::transpose(rh)), buckets, m);
    Var a = nn::masked_softmax(nn::add(content, position), mask);
    if (weights != nullptr) weights->push_back(t.value(a));
    outs.push_back(nn::matmul(a, vh));
  }
  return nn::concat_cols(outs);
}

Var ega_layer(Tape& tape, const nn::ParameterSet& params, const std::string& prefix, Var h, const ExpanderGraph& graph,
              std::span<const int> buckets, const EncoderConfig& cfg, std::size_t layer, const EncodeOptions& opts,
              std::vector<Matrix>* weights) {
  const std::string p = layer_prefix(prefix, layer);
  auto P = [&](const char* name) { return tape.parameter(params, p + name); };
  Var q = nn::matmul(h, P("W_q"));
  Var k = nn::matmul(h, P("W_k"));
  Var v = nn::matmul(h, P("W_v"));
  Var att = opts.attention == AttentionImpl::sparse
                ? graph_attention(q, k, v, P("R"), graph, buckets, cfg.heads, cfg.d_sparse, weights)
                : dense_graph_attention(q, k, v, P("R"), graph, buckets, cfg.heads, cfg.d_sparse, weights);
  const Matrix& av = tape.value(att);
  if (!nn::all_finite(av)) {
    const std::size_t dk = cfg.head_dim();
    for (std::size_t i = 0; i < av.size(); ++i) {
      if (!std::isfinite(av[i])) {
        throw NumericError("encoder layer " + std::to_string(layer) + " head " +
                           std::to_string((i % av.cols()) / dk) + ": non-finite attention output");
      }
    }
  }
  Var h1 = nn::instance_norm(nn::add(h, nn::matmul(att, P("W_o"))), P("norm1.gamma"), P("norm1.beta"));
  Var ff = nn::matmul(nn::relu(nn::add_row(nn::matmul(h1, P("W_ff1")), P("b_ff1"))), P("W_ff2"));
  Var h2 = nn::instance_norm(nn::add(h1, ff), P("norm2.gamma"), P("norm2.beta"));
  if (!nn::all_finite(tape.value(h2))) {
    throw NumericError("encoder layer " + std::to_string(layer) + ": non-finite activations");
  }
  return h2;
}

EncoderOutput encode(Tape& tape, const Instance& inst, const nn::ParameterSet& params, const EncoderConfig& cfg,
                     const std::string& prefix, const EncodeOptions& opts) {
  cfg.validate();
  inst.validate();
  const std::size_t n = inst.size();
  EncoderOutput out;
  Var h0 = embed_inputs(tape, params, prefix, tape.constant(node_features(inst)));
  out.graph = build_expander_graph(tape.value(h0), inst.depot, GraphOptions{cfg.hierarchical});
  const std::vector<int> buckets = relative_buckets(inst, cfg.d_sparse);

  Var h = nn::concat_rows(std::vector<Var>{h0, tape.parameter(params, prefix + "global")});
  Var pooled_sum;
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    Var real = nn::slice_rows(h, 0, n);
    Var global = nn::add(nn::slice_rows(h, n, 1), nn::mean_rows(real));
    h = nn::concat_rows(std::vector<Var>{real, global});
    h = ega_layer(tape, params, prefix, h, out.graph, buckets, cfg, l, opts,
                  opts.record_attention ? &out.attention : nullptr);
    Var pooled = nn::mean_rows(nn::slice_rows(h, 0, n));
    pooled_sum = l == 0 ? pooled : nn::add(pooled_sum, pooled);
  }
  out.h_final = h;
  out.p_multi_scale = nn::scale(pooled_sum, 1.0 / static_cast<double>(cfg.layers));
  out.e_static = nn::add(nn::slice_rows(h, 0, n), nn::broadcast_rows(out.p_multi_scale, n));
  return out;
}

}  // namespace tspd
