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
#include <vector>

#include "tspd/environment.hpp"
#include "tspd/instances.hpp"

namespace tspd {

struct Operation {
  Agent agent = Agent::truck;
  int target = 0;
};

/// A solution expressed as the joint actions fed to the environment.
struct Plan {
  std::vector<JointAction> actions;
  double cost = 0.0;

  /// Flattened (truck, target), (drone, target) pairs in decision order.
  std::vector<Operation> operations() const;
};

/// Largest instance (depot included) accepted by exact_optimum.
inline constexpr int kMaxExactNodes = 8;

struct SearchOptions {
  bool bound_pruning = true;
  bool memoize = true;
};

struct SearchStats {
  std::uint64_t expanded = 0;
  std::uint64_t pruned_by_bound = 0;
  std::uint64_t pruned_by_memo = 0;
};

/// Depth-first enumeration of every feasible joint-action sequence. With the
/// default options, subtrees are cut by an admissible completion-time bound and
/// by clock dominance on repeated states. Ties keep the lexicographically
/// smallest action sequence. Throws SizeError above kMaxExactNodes.
Plan exact_optimum(const Instance& inst, SearchOptions options = {}, SearchStats* stats = nullptr);

/// Truck takes the nearest unmet customer; a docked drone launches to the
/// nearest remaining one other than the truck's; both head home at the end.
Plan greedy_nearest(const Instance& inst);

/// Uniform choice among feasible actions in each phase.
Plan random_rollout(const Instance& inst, std::uint64_t seed);

/// Cost obtained by replaying the plan through the environment.
double replay_cost(const Instance& inst, const Plan& plan);

/// Admissible lower bound on the completion time reachable from `state`.
double completion_lower_bound(const State& state, const Instance& inst);

}  // namespace tspd
