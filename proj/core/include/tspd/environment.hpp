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
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "tspd/instances.hpp"

namespace tspd {

/// One bit per node; 1 = the node may be chosen.
using Mask = std::vector<std::uint8_t>;

/// Target of an agent's current move and the time left to reach it.
/// remaining == 0 means the agent is at rest at `target`.
struct PendingAction {
  int target = 0;
  double remaining = 0.0;

  friend bool operator==(const PendingAction&, const PendingAction&) = default;
};

/// Decision-epoch state of the truck/drone system.
///
/// Besides the demand vector, positions, s_d, r_d and the two pending actions,
/// the state carries two bookkeeping fields needed to keep the feasibility rules
/// Markovian: `drone_ready` (the drone may launch; cleared on docking, set again
/// when the truck serves a customer) and `sortie_target` (the customer the drone
/// is flying to serve, or -1).
struct State {
  std::vector<std::uint8_t> demand;  // per node, the depot entry is always 0
  int truck_loc = 0;
  int drone_loc = 0;
  bool drone_busy = false;        // s_d: away from the truck
  bool drone_unreturned = false;  // r_d: launched and not yet docked
  bool drone_ready = true;
  int sortie_target = -1;
  PendingAction truck_pending;
  PendingAction drone_pending;
  double clock = 0.0;

  int unmet() const noexcept;

  friend bool operator==(const State&, const State&) = default;
};

struct JointAction {
  int truck = 0;
  int drone = 0;

  friend bool operator==(const JointAction&, const JointAction&) = default;
};

enum class Phase { truck, drone };

/// Initial state (all demands unmet, both agents docked at the depot) and the
/// truck's availability mask.
std::pair<State, Mask> reset(const Instance& inst);

/// Feasible targets for one agent. The drone phase needs the truck's choice for
/// the same epoch. Throws StateError for an inconsistent state.
Mask action_masks(const State& state, const Instance& inst, Phase phase,
                  std::optional<int> truck_choice = std::nullopt);

/// All demands met, both agents resting at the depot, drone docked.
bool is_terminal(const State& state, const Instance& inst) noexcept;

/// Fixed decode horizon 2n + 2.
int horizon(const Instance& inst) noexcept;

struct StepResult {
  State next;
  double dt = 0.0;
};

/// Deterministic transition. dt is the smallest positive remaining time over the
/// agents that are moving; reward is -dt. Terminal states accept (depot, depot)
/// as a zero-time no-op.
StepResult step(const State& state, JointAction action, const Instance& inst);

/// Throws StateError naming the violated invariant, if any.
void check_invariants(const State& state, const Instance& inst);

struct TrajectoryStep {
  State state;
  JointAction action;
  double dt = 0.0;
  double truck_log_prob = 0.0;
  double drone_log_prob = 0.0;
};

struct Trajectory {
  int depot = 0;
  std::vector<TrajectoryStep> steps;
  State final_state;
  double total_cost = 0.0;

  bool terminal() const noexcept;
  double log_prob_sum() const noexcept;
};

/// Sum of dt over a terminal trajectory. Throws StateError otherwise.
double episode_cost(const Trajectory& traj);

/// A single physical move: a truck leg or a drone flight. Rides on the truck
/// and waiting are not movements.
struct Movement {
  int step = 0;
  Agent agent = Agent::truck;
  int from = 0;
  int to = 0;
  double depart = 0.0;
  double arrive = 0.0;
};

/// Reconstructs each agent's legs from the recorded joint actions, timing each
/// leg from its departure clock and its own distance / speed.
std::vector<Movement> movements(const Trajectory& traj, const Instance& inst);

/// Route-replay completion time: the later of the last truck arrival and the
/// last drone arrival. Computed from movements(), independently of the dt sums.
double route_completion_time(const Trajectory& traj, const Instance& inst);

/// Lines "t agent from to depart arrive" followed by "cost <value>".
void write_trajectory(std::ostream& out, const Trajectory& traj, const Instance& inst);

/// Replays joint actions from the initial state. Throws on infeasible actions.
Trajectory replay(const Instance& inst, const std::vector<JointAction>& actions);

}  // namespace tspd
