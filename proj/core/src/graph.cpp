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

#include "tspd/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tspd/error.hpp"

namespace tspd {

std::size_t ExpanderGraph::edge_count() const noexcept {
  return static_cast<std::size_t>(std::count(adjacency.begin(), adjacency.end(), std::uint8_t{1}));
}

nn::Matrix ExpanderGraph::additive_mask() const {
  const std::size_t m = size();
  nn::Matrix mask(m, m, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < m * m; ++i) {
    if (adjacency[i] != 0) mask[i] = 0.0;
  }
  return mask;
}

std::size_t knn_count(std::size_t n) {
  if (n < 2) throw ArgumentError("knn_count: need at least two nodes");
  std::size_t k = 0;
  while ((std::size_t{1} << k) < n) ++k;
  return std::clamp<std::size_t>(k, 1, n - 1);
}

std::size_t stripe_stride(std::size_t n) {
  const std::size_t groups = std::max<std::size_t>(1, n / 8);
  return (n + groups - 1) / groups;
}

ExpanderGraph build_expander_graph(const nn::Matrix& h, int depot, const GraphOptions& opts) {
  const std::size_t n = h.rows();
  if (n < 2) throw ArgumentError("expander graph needs at least two nodes");
  if (depot < 0 || static_cast<std::size_t>(depot) >= n) throw ArgumentError("expander graph: depot out of range");
  ExpanderGraph g;
  g.real_nodes = n;
  g.k = knn_count(n);
  const std::size_t m = n + 1;
  g.adjacency.assign(m * m, 0);
  auto link = [&](std::size_t i, std::size_t j) {
    g.adjacency[i * m + j] = 1;
    g.adjacency[j * m + i] = 1;
  };

  std::vector<std::uint8_t> knn(n * n, 0);
  std::vector<double> d2(n);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < h.cols(); ++c) {
        const double diff = h(i, c) - h(j, c);
        s += diff * diff;
      }
      d2[j] = s;
    }
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d2[a] < d2[b]; });
    std::size_t taken = 0;
    for (std::size_t j : order) {
      if (taken == g.k) break;
      if (j == i) continue;
      link(i, j);
      knn[i * n + j] = knn[j * n + i] = 1;
      ++taken;
    }
  }

  g.knn_degree.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    g.knn_degree[i] = static_cast<std::size_t>(std::count(knn.begin() + static_cast<std::ptrdiff_t>(i * n),
                                                          knn.begin() + static_cast<std::ptrdiff_t>((i + 1) * n), 1));
  }

  if (opts.hierarchical) {
    const std::size_t s = stripe_stride(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n && j <= i + 2; ++j) {
        if (i / s == j / s) link(i, j);
      }
    }
  }

  g.depot = depot;
  const auto dep = static_cast<std::size_t>(depot);
  for (std::size_t j = 0; j < n; ++j) link(dep, j);
  for (std::size_t j = 0; j < m; ++j) link(n, j);
  for (std::size_t i = 0; i < m; ++i) g.adjacency[i * m + i] = 1;

  g.neighbors.assign(m, {});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (g.adjacency[i * m + j] != 0) g.neighbors[i].push_back(static_cast<int>(j));
    }
  }
  return g;
}

std::size_t row_degree_bound(const ExpanderGraph& g, std::size_t i) {
  if (i >= g.real_nodes || i == static_cast<std::size_t>(g.depot)) return g.size();
  return g.knn_degree[i] + 5 + 2 + 1;
}

std::vector<int> relative_buckets(const Instance& inst, std::size_t d_sparse) {
  if (d_sparse == 0) throw ArgumentError("relative_buckets: d_sparse must be positive");
  const std::size_t n = inst.size();
  const std::size_t m = n + 1;
  double diameter = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) diameter = std::max(diameter, inst.dist(static_cast<int>(i), static_cast<int>(j)));
  }
  const std::size_t bins = std::max<std::size_t>(1, d_sparse - 1);
  const int global_bucket = static_cast<int>(d_sparse - 1);
  std::vector<int> b(m * m, global_bucket);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t q = 0;
      if (diameter > 0.0) {
        const double x = inst.dist(static_cast<int>(i), static_cast<int>(j)) / diameter * static_cast<double>(bins);
        q = std::min(bins - 1, static_cast<std::size_t>(x));
      }
      b[i * m + j] = static_cast<int>(q);
    }
  }
  return b;
}

}  // namespace tspd
