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

#include <algorithm>
#include <ostream>

#include "tspd/environment.hpp"
#include "tspd/error.hpp"

namespace tspd {

bool Trajectory::terminal() const noexcept {
  const State& s = final_state;
  return s.unmet() == 0 && s.truck_loc == depot && s.drone_loc == depot && !s.drone_busy &&
         s.truck_pending.remaining == 0.0 && s.drone_pending.remaining == 0.0;
}

double Trajectory::log_prob_sum() const noexcept {
  double sum = 0.0;
  for (const auto& st : steps) sum += st.truck_log_prob + st.drone_log_prob;
  return sum;
}

double episode_cost(const Trajectory& traj) {
  if (!traj.terminal()) throw StateError("episode cost requested for a non-terminal trajectory");
  double cost = 0.0;
  for (const auto& st : traj.steps) cost += st.dt;
  return cost;
}

std::vector<Movement> movements(const Trajectory& traj, const Instance& inst) {
  std::vector<Movement> out;
  for (std::size_t t = 0; t < traj.steps.size(); ++t) {
    const State& s = traj.steps[t].state;
    const JointAction a = traj.steps[t].action;
    const int step_index = static_cast<int>(t);
    if (s.truck_pending.remaining == 0.0 && a.truck != s.truck_loc) {
      out.push_back({step_index, Agent::truck, s.truck_loc, a.truck, s.clock,
                     s.clock + inst.dist(s.truck_loc, a.truck) / inst.speed(Agent::truck)});
    }
    const bool riding = !s.drone_busy && a.drone == a.truck;
    if (!riding && s.drone_pending.remaining == 0.0 && a.drone != s.drone_loc) {
      out.push_back({step_index, Agent::drone, s.drone_loc, a.drone, s.clock,
                     s.clock + inst.dist(s.drone_loc, a.drone) / inst.speed(Agent::drone)});
    }
  }
  return out;
}

double route_completion_time(const Trajectory& traj, const Instance& inst) {
  double truck_done = 0.0;
  double drone_done = 0.0;
  for (const Movement& m : movements(traj, inst)) {
    double& done = m.agent == Agent::truck ? truck_done : drone_done;
    done = std::max(done, m.arrive);
  }
  return std::max(truck_done, drone_done);
}

void write_trajectory(std::ostream& out, const Trajectory& traj, const Instance& inst) {
  for (const Movement& m : movements(traj, inst)) {
    out << m.step << ' ' << to_string(m.agent) << ' ' << m.from << ' ' << m.to << ' ' << format_number(m.depart)
        << ' ' << format_number(m.arrive) << '\n';
  }
  out << "cost " << format_number(traj.total_cost) << '\n';
}

Trajectory replay(const Instance& inst, const std::vector<JointAction>& actions) {
  auto [state, mask] = reset(inst);
  Trajectory traj;
  traj.depot = inst.depot;
  for (const JointAction& a : actions) {
    if (is_terminal(state, inst)) {
      step(state, a, inst);  // validates the no-op
      continue;
    }
    StepResult r = step(state, a, inst);
    traj.steps.push_back({state, a, r.dt, 0.0, 0.0});
    state = std::move(r.next);
  }
  traj.final_state = state;
  traj.total_cost = state.clock;
  return traj;
}

}  // namespace tspd
