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

#include "tspd/parameters.hpp"

#include <algorithm>
#include <cmath>

#include "tspd/error.hpp"

namespace tspd::nn {

void ParameterSet::add(std::string name, Matrix value) {
  if (index_.contains(name)) throw ArgumentError("duplicate parameter name '" + name + "'");
  index_.emplace(name, values_.size());
  names_.push_back(std::move(name));
  values_.push_back(std::move(value));
}

bool ParameterSet::contains(std::string_view name) const { return index_.contains(std::string(name)); }

std::size_t ParameterSet::index(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw ArgumentError("unknown parameter '" + std::string(name) + "'");
  return it->second;
}

std::size_t ParameterSet::scalar_count() const noexcept {
  std::size_t n = 0;
  for (const Matrix& m : values_) n += m.size();
  return n;
}

ParameterSet ParameterSet::zeros_like() const {
  ParameterSet out;
  for (std::size_t i = 0; i < values_.size(); ++i) out.add(names_[i], Matrix(values_[i].rows(), values_[i].cols()));
  return out;
}

bool ParameterSet::same_layout(const ParameterSet& other) const noexcept {
  if (names_ != other.names_) return false;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!values_[i].same_shape(other.values_[i])) return false;
  }
  return true;
}

void ParameterSet::set_zero() noexcept {
  for (Matrix& m : values_) m.fill(0.0);
}

void ParameterSet::add_scaled(const ParameterSet& other, double scale) {
  if (!same_layout(other)) throw ArgumentError("parameter layouts differ");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    auto dst = values_[i].data();
    auto src = other.values_[i].data();
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += scale * src[j];
  }
}

bool all_finite(const ParameterSet& params) noexcept {
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!all_finite(params.at(i))) return false;
  }
  return true;
}

double max_abs_difference(const ParameterSet& a, const ParameterSet& b) {
  if (!a.same_layout(b)) throw ArgumentError("parameter layouts differ");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a.at(i).size(); ++j) worst = std::max(worst, std::abs(a.at(i)[j] - b.at(i)[j]));
  }
  return worst;
}

Matrix uniform_init(std::size_t rows, std::size_t cols, std::size_t fan_in, SplitMix64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(fan_in, 1)));
  Matrix m(rows, cols);
  for (double& v : m.data()) v = (2.0 * rng.uniform() - 1.0) * bound;
  return m;
}

}  // namespace tspd::nn
