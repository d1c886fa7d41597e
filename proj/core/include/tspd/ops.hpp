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
#include <span>
#include <vector>

#include "tspd/autograd.hpp"

namespace tspd::nn {

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
/// Elementwise product.
Var mul(Var a, Var b);
/// a (m x n) + row (1 x n) on every row.
Var add_row(Var a, Var row);
Var scale(Var a, double c);
/// a * s for a 1 x 1 node s.
Var scale_by(Var a, Var s);
Var one_minus(Var a);

Var tanh(Var a);
Var sigmoid(Var a);
Var relu(Var a);

Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var slice_cols(Var a, std::size_t begin, std::size_t count);
Var slice_rows(Var a, std::size_t begin, std::size_t count);
/// Embedding lookup: out row i = a row rows[i].
Var gather_rows(Var a, std::span<const int> rows);
/// 1 x n row repeated m times.
Var broadcast_rows(Var row, std::size_t m);
Var transpose(Var a);

/// Column means, 1 x n.
Var mean_rows(Var a);
/// Column maxima, 1 x n; the gradient goes to the first maximal row.
Var max_rows(Var a);
Var sum(Var a);

/// Per-column normalization across rows: (x - mean) / sqrt(var + eps), then
/// gamma * . + beta with 1 x n gamma and beta. Population variance.
Var instance_norm(Var x, Var gamma, Var beta, double eps = 1e-5);

/// Row-wise softmax of scores + mask, where mask holds 0 or -inf and has the
/// shape of scores or a single row. Masked entries are exactly 0. Throws
/// MaskError when a row has no admissible entry.
Var masked_softmax(Var scores, const Matrix& mask);
/// Row-wise log-softmax under the same mask; masked entries are -inf.
Var masked_log_softmax(Var scores, const Matrix& mask);

/// out(i, j) = a(i, index[i * cols + j]); out is rows(a) x cols.
Var gather_cols(Var a, std::span<const int> index, std::size_t cols);

/// 1 x 1 node holding a(r, c).
Var pick(Var a, std::size_t r, std::size_t c);

/// 1 x n additive mask from a 0/1 availability vector.
Matrix additive_mask(std::span<const std::uint8_t> allowed);

}  // namespace tspd::nn
