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

#include "tspd/environment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tspd/error.hpp"

namespace tspd {

int State::unmet() const noexcept {
  return static_cast<int>(std::count(demand.begin(), demand.end(), std::uint8_t{1}));
}

std::pair<State, Mask> reset(const Instance& inst) {
  inst.validate();
  State s;
  s.demand.assign(static_cast<std::size_t>(inst.size()), 1);
  s.demand[static_cast<std::size_t>(inst.depot)] = 0;
  s.truck_loc = s.drone_loc = inst.depot;
  s.truck_pending = PendingAction{inst.depot, 0.0};
  s.drone_pending = PendingAction{inst.depot, 0.0};
  Mask mask = action_masks(s, inst, Phase::truck);
  return {std::move(s), std::move(mask)};
}

bool is_terminal(const State& s, const Instance& inst) noexcept {
  return s.unmet() == 0 && s.truck_loc == inst.depot && s.drone_loc == inst.depot && !s.drone_busy &&
         s.truck_pending.remaining == 0.0 && s.drone_pending.remaining == 0.0;
}

int horizon(const Instance& inst) noexcept { return 2 * inst.size() + 2; }

namespace {

// Whether the drone advances on its own while the truck waits in place.
bool drone_progresses_alone(const State& s) {
  if (s.drone_pending.remaining > 0.0) return true;
  if (s.drone_busy) return s.drone_loc != s.truck_loc;
  return s.drone_ready && s.unmet() > 0;
}

void check_node(int node, const Instance& inst, const char* what) {
  if (node < 0 || node >= inst.size()) {
    throw FeasibilityError(std::string(what) + " target " + std::to_string(node) + " is not a node");
  }
}

Mask truck_mask(const State& s, const Instance& inst) {
  Mask m(static_cast<std::size_t>(inst.size()), 0);
  if (s.truck_pending.remaining > 0.0) {
    m[static_cast<std::size_t>(s.truck_pending.target)] = 1;
    return m;
  }
  if (is_terminal(s, inst)) {
    m[static_cast<std::size_t>(inst.depot)] = 1;
    return m;
  }
  bool any = false;
  for (int i = 0; i < inst.size(); ++i) {
    if (s.demand[static_cast<std::size_t>(i)] != 0 && i != s.sortie_target) {
      m[static_cast<std::size_t>(i)] = 1;
      any = true;
    }
  }
  // Nothing left for the truck itself: head for (or stay at) the depot.
  if (!any) m[static_cast<std::size_t>(inst.depot)] = 1;
  if (s.unmet() > 0 && drone_progresses_alone(s)) m[static_cast<std::size_t>(s.truck_loc)] = 1;
  return m;
}

Mask drone_mask(const State& s, const Instance& inst, int truck_choice) {
  Mask m(static_cast<std::size_t>(inst.size()), 0);
  if (s.drone_pending.remaining > 0.0) {
    m[static_cast<std::size_t>(s.drone_pending.target)] = 1;
    return m;
  }
  if (is_terminal(s, inst)) {
    m[static_cast<std::size_t>(inst.depot)] = 1;
    return m;
  }
  if (s.drone_busy) {
    // Sortie done: rendezvous wherever the truck is headed (or waiting).
    m[static_cast<std::size_t>(truck_choice)] = 1;
    return m;
  }
  if (truck_choice != s.truck_loc) m[static_cast<std::size_t>(truck_choice)] = 1;
  if (s.drone_ready) {
    for (int i = 0; i < inst.size(); ++i) {
      if (s.demand[static_cast<std::size_t>(i)] != 0 && i != truck_choice) m[static_cast<std::size_t>(i)] = 1;
    }
  }
  return m;
}

}  // namespace

Mask action_masks(const State& state, const Instance& inst, Phase phase, std::optional<int> truck_choice) {
  if (state.demand.size() != static_cast<std::size_t>(inst.size())) {
    throw StateError("state does not belong to this instance");
  }
  Mask m;
  if (phase == Phase::truck) {
    m = truck_mask(state, inst);
  } else {
    if (!truck_choice) throw StateError("drone mask requires the truck's choice");
    if (*truck_choice < 0 || *truck_choice >= inst.size()) throw StateError("truck choice is not a node");
    m = drone_mask(state, inst, *truck_choice);
  }
  if (std::find(m.begin(), m.end(), std::uint8_t{1}) == m.end()) {
    throw StateError(std::string("no feasible ") + (phase == Phase::truck ? "truck" : "drone") + " action");
  }
  return m;
}

StepResult step(const State& s, JointAction a, const Instance& inst) {
  check_node(a.truck, inst, "truck");
  check_node(a.drone, inst, "drone");

  if (is_terminal(s, inst)) {
    if (a.truck != inst.depot || a.drone != inst.depot) {
      throw FeasibilityError("terminal state only admits the depot no-op");
    }
    return {s, 0.0};
  }

  const bool truck_resting = s.truck_pending.remaining == 0.0;
  const bool drone_resting = s.drone_pending.remaining == 0.0;
  const double truck_rem =
      truck_resting ? inst.time(Agent::truck, s.truck_loc, a.truck) : s.truck_pending.remaining;
  const bool riding = !s.drone_busy && a.drone == a.truck;
  const double drone_rem =
      riding ? truck_rem : (drone_resting ? inst.time(Agent::drone, s.drone_loc, a.drone) : s.drone_pending.remaining);

  double dt = std::numeric_limits<double>::infinity();
  if (truck_rem > 0.0) dt = truck_rem;
  if (!riding && drone_rem > 0.0) dt = std::min(dt, drone_rem);
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw LivelockError("no agent advances: truck -> " + std::to_string(a.truck) + ", drone -> " +
                        std::to_string(a.drone) + " with " + std::to_string(s.unmet()) + " demands unmet");
  }

  const Mask tm = action_masks(s, inst, Phase::truck);
  if (tm[static_cast<std::size_t>(a.truck)] == 0) {
    throw FeasibilityError("truck target " + std::to_string(a.truck) + " is masked");
  }
  const Mask dm = action_masks(s, inst, Phase::drone, a.truck);
  if (dm[static_cast<std::size_t>(a.drone)] == 0) {
    throw FeasibilityError("drone target " + std::to_string(a.drone) + " is masked");
  }

  const double tol = 1e-12 * std::max(1.0, dt);
  State nx = s;
  nx.clock = s.clock + dt;

  bool truck_arrived = false;
  if (truck_resting && a.truck == s.truck_loc) {
    nx.truck_pending = PendingAction{s.truck_loc, 0.0};
  } else if (truck_rem - dt <= tol) {
    nx.truck_loc = a.truck;
    nx.truck_pending = PendingAction{a.truck, 0.0};
    truck_arrived = true;
  } else {
    nx.truck_pending = PendingAction{a.truck, truck_rem - dt};
  }

  bool drone_arrived = false;
  if (riding) {
    nx.drone_loc = nx.truck_loc;
    nx.drone_pending = nx.truck_pending;
  } else {
    if (!s.drone_busy) {
      nx.drone_busy = true;
      nx.drone_unreturned = true;
      nx.sortie_target = a.drone;
    }
    if (drone_resting && a.drone == s.drone_loc) {
      nx.drone_pending = PendingAction{s.drone_loc, 0.0};
    } else if (drone_rem - dt <= tol) {
      nx.drone_loc = a.drone;
      nx.drone_pending = PendingAction{a.drone, 0.0};
      drone_arrived = true;
    } else {
      nx.drone_pending = PendingAction{a.drone, drone_rem - dt};
    }
  }

  bool truck_served = false;
  if (truck_arrived && inst.is_customer(nx.truck_loc) && nx.demand[static_cast<std::size_t>(nx.truck_loc)] != 0) {
    nx.demand[static_cast<std::size_t>(nx.truck_loc)] = 0;
    truck_served = true;
  }
  if (drone_arrived && nx.drone_loc == nx.sortie_target) {
    nx.demand[static_cast<std::size_t>(nx.drone_loc)] = 0;
    nx.sortie_target = -1;
  }
  if (nx.drone_busy && nx.sortie_target < 0 && nx.truck_pending.remaining == 0.0 &&
      nx.drone_pending.remaining == 0.0 && nx.drone_loc == nx.truck_loc) {
    nx.drone_busy = false;
    nx.drone_unreturned = false;
    nx.drone_ready = false;
  }
  if (truck_served) nx.drone_ready = true;

  return {std::move(nx), dt};
}

void check_invariants(const State& s, const Instance& inst) {
  const auto n = static_cast<std::size_t>(inst.size());
  if (s.demand.size() != n) throw StateError("demand vector size mismatch");
  if (s.demand[static_cast<std::size_t>(inst.depot)] != 0) throw StateError("depot carries demand");
  if (s.truck_loc < 0 || s.truck_loc >= inst.size() || s.drone_loc < 0 || s.drone_loc >= inst.size()) {
    throw StateError("agent location out of range");
  }
  if (!s.drone_busy) {
    if (s.drone_loc != s.truck_loc) throw StateError("docked drone is not with the truck");
    if (s.drone_unreturned) throw StateError("docked drone flagged as unreturned");
    if (s.sortie_target >= 0) throw StateError("docked drone has a sortie target");
  } else if (!s.drone_unreturned) {
    throw StateError("busy drone flagged as returned");
  }
  if (s.truck_pending.remaining < 0.0 || s.drone_pending.remaining < 0.0) {
    throw StateError("negative remaining time");
  }
  if (s.truck_pending.remaining == 0.0 && s.truck_pending.target != s.truck_loc) {
    throw StateError("resting truck is not at its target");
  }
  if (s.drone_pending.remaining == 0.0 && s.drone_pending.target != s.drone_loc) {
    throw StateError("resting drone is not at its target");
  }
  if (s.sortie_target >= 0) {
    if (s.demand[static_cast<std::size_t>(s.sortie_target)] == 0) throw StateError("sortie to a served customer");
    if (s.drone_pending.target != s.sortie_target) throw StateError("drone not heading to its sortie target");
  }
  if (!(s.clock >= 0.0)) throw StateError("negative clock");
}

}  // namespace tspd
