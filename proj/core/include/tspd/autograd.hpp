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

#include <deque>
#include <functional>
#include <string_view>

#include "tspd/parameters.hpp"
#include "tspd/tensor.hpp"

namespace tspd::nn {

class Tape;

/// Handle to a node of a Tape. Cheap to copy; only valid while its tape lives.
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  bool valid() const noexcept { return tape != nullptr && id >= 0; }
  const Matrix& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
};

/// Append-only record of a computation for reverse-mode differentiation.
/// Nodes only reference earlier nodes, so the recorded graph is acyclic and
/// backward() is a single reverse sweep. Not thread-safe; use one tape per
/// episode and merge gradients with collect().
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Matrix& grad)>;

  Tape() = default;
  /// With grad_enabled = false parameters are bound as constants and no
  /// backward rules are recorded (inference mode).
  explicit Tape(bool grad_enabled) : grad_enabled_(grad_enabled) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var variable(Matrix value);
  /// Leaf bound to params[name] without copying; the set must outlive the tape.
  Var parameter(const ParameterSet& params, std::string_view name);

  /// Low-level hook used by the ops: registers a result and its backward rule.
  Var record(Matrix value, bool requires_grad, BackwardFn backward);

  const Matrix& value(Var v) const;
  /// Empty matrix when no gradient reached the node.
  const Matrix& grad(Var v) const;
  bool requires_grad(Var v) const;

  /// Adds g into the gradient of v (no-op for constants).
  void accumulate(Var v, const Matrix& g);
  /// Zero-initialized gradient buffer of v for scatter-style updates.
  Matrix& grad_buffer(Var v);

  /// Seeds d(loss) = seed and propagates to every reachable node. The loss must
  /// be a 1 x 1 node of this tape.
  void backward(Var loss, double seed = 1.0);
  void zero_grad();

  /// grads[name] += scale * d/d(name) for every leaf bound to `source`;
  /// `grads` must share the layout of `source`.
  void collect(const ParameterSet& source, ParameterSet& grads, double scale = 1.0) const;

  std::size_t size() const noexcept { return nodes_.size(); }
  bool grad_enabled() const noexcept { return grad_enabled_; }

 private:
  struct Node {
    Matrix value;
    const Matrix* external = nullptr;
    Matrix grad;
    bool requires_grad = false;
    BackwardFn backward;
    const ParameterSet* owner = nullptr;
    std::size_t param_index = 0;

    const Matrix& val() const { return external != nullptr ? *external : value; }
  };

  Node& node(Var v);
  const Node& node(Var v) const;

  std::deque<Node> nodes_;
  bool grad_enabled_ = true;
};

}  // namespace tspd::nn
