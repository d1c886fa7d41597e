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
#include <cstdint>
#include <span>
#include <vector>

#include "tspd/instances.hpp"
#include "tspd/tensor.hpp"

namespace tspd {

struct GraphOptions {
  bool hierarchical = true;
};

/// Sparse attention graph over N real nodes plus a global node at index N.
struct ExpanderGraph {
  std::size_t real_nodes = 0;
  std::size_t k = 0;
  int depot = 0;
  /// Row-major (N+1) x (N+1) adjacency, symmetric, with self-loops.
  std::vector<std::uint8_t> adjacency;
  /// Degree of each real node in the symmetrized k-NN graph alone.
  std::vector<std::size_t> knn_degree;
  /// Sorted neighbor lists, self included.
  std::vector<std::vector<int>> neighbors;

  std::size_t size() const noexcept { return real_nodes + 1; }
  std::size_t global_node() const noexcept { return real_nodes; }
  bool connected(std::size_t i, std::size_t j) const { return adjacency[i * size() + j] != 0; }
  std::size_t edge_count() const noexcept;
  /// 0 where connected, -inf elsewhere.
  nn::Matrix additive_mask() const;
};

/// ceil(log2 n), clamped to [1, n - 1].
std::size_t knn_count(std::size_t n);

/// Stripe group size for hierarchical edges: ceil(N / max(1, floor(N / 8))).
std::size_t stripe_stride(std::size_t n);

/// Union of symmetrized k-NN in the rows of `h` (N x D), hierarchical stripes,
/// depot <-> all, global <-> all and self-loops.
ExpanderGraph build_expander_graph(const nn::Matrix& h, int depot, const GraphOptions& opts = {});

/// Upper bound on connections in real row i: symmetrized k-NN degree + 5
/// (stripe) + 2 (depot, global) + 1 (self). The depot row and the global row
/// connect to every node, so their bound is N + 1.
std::size_t row_degree_bound(const ExpanderGraph& g, std::size_t i);

/// (N+1) x (N+1) relative position buckets. Real pairs are quantized by
/// coordinate distance into d_sparse - 1 bins over [0, diameter]; pairs that
/// involve the global node use bucket d_sparse - 1.
std::vector<int> relative_buckets(const Instance& inst, std::size_t d_sparse);

}  // namespace tspd
