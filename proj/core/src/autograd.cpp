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

#include "tspd/autograd.hpp"

#include <string>

#include "tspd/error.hpp"

namespace tspd::nn {

const Matrix& Var::value() const {
  if (!valid()) throw GraphError("use of an unbound variable");
  return tape->value(*this);
}

Tape::Node& Tape::node(Var v) {
  if (v.tape != this || v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size()) {
    throw GraphError("variable does not belong to this tape");
  }
  return nodes_[static_cast<std::size_t>(v.id)];
}

const Tape::Node& Tape::node(Var v) const {
  if (v.tape != this || v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size()) {
    throw GraphError("variable does not belong to this tape");
  }
  return nodes_[static_cast<std::size_t>(v.id)];
}

Var Tape::constant(Matrix value) { return record(std::move(value), false, nullptr); }

Var Tape::variable(Matrix value) { return record(std::move(value), grad_enabled_, nullptr); }

Var Tape::parameter(const ParameterSet& params, std::string_view name) {
  const std::size_t idx = params.index(name);
  Node n;
  n.external = &params.at(idx);
  n.requires_grad = grad_enabled_;
  n.owner = &params;
  n.param_index = idx;
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

Var Tape::record(Matrix value, bool requires_grad, BackwardFn backward) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

const Matrix& Tape::value(Var v) const { return node(v).val(); }

const Matrix& Tape::grad(Var v) const { return node(v).grad; }

bool Tape::requires_grad(Var v) const { return node(v).requires_grad; }

Matrix& Tape::grad_buffer(Var v) {
  Node& n = node(v);
  if (n.grad.empty()) n.grad = Matrix(n.val().rows(), n.val().cols());
  return n.grad;
}

void Tape::accumulate(Var v, const Matrix& g) {
  Node& n = node(v);
  if (!n.requires_grad) return;
  if (!g.same_shape(n.val())) throw GraphError("gradient shape does not match its node");
  if (n.grad.empty()) {
    n.grad = g;
    return;
  }
  auto dst = n.grad.data();
  auto src = g.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

void Tape::backward(Var loss, double seed) {
  Node& root = node(loss);
  if (root.val().size() != 1) throw GraphError("backward() needs a scalar loss");
  if (!root.requires_grad) return;
  accumulate(loss, Matrix::scalar(seed));
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.backward || n.grad.empty()) continue;
    // The rule only touches nodes created before this one.
    n.backward(*this, n.grad);
  }
}

void Tape::zero_grad() {
  for (Node& n : nodes_) n.grad = Matrix();
}

void Tape::collect(const ParameterSet& source, ParameterSet& grads, double scale) const {
  if (source.size() != grads.size()) throw GraphError("gradient set does not match its parameter set");
  for (const Node& n : nodes_) {
    if (n.owner != &source || n.grad.empty()) continue;
    auto dst = grads.at(n.param_index).data();
    auto src = n.grad.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
  }
}

}  // namespace tspd::nn
