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
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tspd/rng.hpp"
#include "tspd/tensor.hpp"

namespace tspd::nn {

/// Insertion-ordered collection of named matrices. Used both for trainable
/// parameters and for gradients / optimizer moments laid out like them.
class ParameterSet {
 public:
  /// Throws ArgumentError on a duplicate name.
  void add(std::string name, Matrix value);

  bool contains(std::string_view name) const;
  std::size_t index(std::string_view name) const;

  const Matrix& get(std::string_view name) const { return values_[index(name)]; }
  Matrix& get(std::string_view name) { return values_[index(name)]; }
  const Matrix& at(std::size_t i) const { return values_[i]; }
  Matrix& at(std::size_t i) { return values_[i]; }
  const std::string& name(std::size_t i) const { return names_[i]; }

  std::size_t size() const noexcept { return values_.size(); }
  std::size_t scalar_count() const noexcept;

  /// Same names and shapes, all zeros.
  ParameterSet zeros_like() const;
  bool same_layout(const ParameterSet& other) const noexcept;

  void set_zero() noexcept;
  /// this += scale * other; layouts must match.
  void add_scaled(const ParameterSet& other, double scale);

  friend bool operator==(const ParameterSet& a, const ParameterSet& b) {
    return a.names_ == b.names_ && a.values_ == b.values_;
  }

 private:
  std::vector<std::string> names_;
  std::vector<Matrix> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

bool all_finite(const ParameterSet& params) noexcept;
double max_abs_difference(const ParameterSet& a, const ParameterSet& b);

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization.
Matrix uniform_init(std::size_t rows, std::size_t cols, std::size_t fan_in, SplitMix64& rng);

}  // namespace tspd::nn
