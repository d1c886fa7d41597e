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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tspd/environment.hpp"
#include "tspd/instances.hpp"
#include "tspd/model.hpp"

namespace tspd {

/// (z - z_star) / z_star * 100. Throws ArgumentError unless z_star > 0.
double gap(double z, double z_star);

enum class Strategy { greedy, sample };

Strategy parse_strategy(std::string_view s);

struct EvalOptions {
  Strategy strategy = Strategy::greedy;
  std::size_t k = 1;
  std::uint64_t seed = 0;
  /// Per-instance baseline costs in set order.
  std::optional<std::vector<double>> baseline;
  /// Worker threads across instances; 1 = sequential.
  std::size_t threads = 1;
};

struct InstanceResult {
  std::size_t index = 0;
  double cost = 0.0;
  double seconds = 0.0;
  std::optional<double> baseline;
  std::optional<double> gap;
  Trajectory trajectory;
};

struct EvalReport {
  std::string strategy;  // "greedy" or "sampling_<k>"
  std::vector<InstanceResult> rows;
  double mean_cost = 0.0;
  double mean_seconds = 0.0;
  std::optional<double> mean_gap;
};

/// Seed of sample i for instance j; sample sets are nested in k.
std::uint64_t sample_seed(std::uint64_t seed, std::size_t instance, std::size_t sample) noexcept;

/// Lowest-cost trajectory over samples 0..k-1 (earliest wins ties).
Trajectory best_of_k(const Model& model, const Instance& inst, std::size_t k, std::uint64_t seed,
                     std::size_t instance_index = 0);

/// Timing covers encode + decode only.
EvalReport evaluate(const Model& model, const InstanceSet& set, const EvalOptions& opts);

/// Worker cap from TSPD_THREADS (at least 1), else `fallback`.
std::size_t thread_cap(std::size_t fallback = 1);

void write_report_csv(std::ostream& out, const EvalReport& report);
/// Aligned table with cost, Gap and Time(s) columns and a mean row.
void write_report_table(std::ostream& out, const EvalReport& report);

/// One cost per non-empty line; '#' starts a comment.
std::vector<double> read_baselines(const std::filesystem::path& path);
void write_baselines(const std::filesystem::path& path, const std::vector<double>& costs);

}  // namespace tspd
