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

#include "tspd/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>

#include "tspd/error.hpp"
#include "tspd/rng.hpp"

namespace tspd {

std::vector<Operation> Plan::operations() const {
  std::vector<Operation> ops;
  ops.reserve(actions.size() * 2);
  for (const JointAction& a : actions) {
    ops.push_back({Agent::truck, a.truck});
    ops.push_back({Agent::drone, a.drone});
  }
  return ops;
}

double replay_cost(const Instance& inst, const Plan& plan) { return replay(inst, plan.actions).total_cost; }

double completion_lower_bound(const State& s, const Instance& inst) {
  const double v_truck = inst.speed(Agent::truck);
  const double v_max = std::max(v_truck, inst.speed(Agent::drone));
  const int depot = inst.depot;
  const int truck_at = s.truck_pending.target;
  const int drone_at = s.drone_pending.target;
  const double truck_free = s.truck_pending.remaining;
  const double drone_free = s.drone_pending.remaining;

  double bound = truck_free + inst.dist(truck_at, depot) / v_truck;
  bound = std::max(bound, drone_free + inst.dist(drone_at, depot) / v_max);
  for (int c = 0; c < inst.size(); ++c) {
    if (s.demand[static_cast<std::size_t>(c)] == 0) continue;
    const double by_truck = truck_free + (inst.dist(truck_at, c) + inst.dist(c, depot)) / v_truck;
    const double by_drone = drone_free + (inst.dist(drone_at, c) + inst.dist(c, depot)) / v_max;
    bound = std::max(bound, std::min(by_truck, by_drone));
  }
  return s.clock + bound;
}

namespace {

struct StateKey {
  std::uint32_t demand = 0;
  std::int8_t truck_loc = 0, drone_loc = 0, sortie = 0, truck_target = 0, drone_target = 0;
  std::uint8_t flags = 0;
  double truck_rem = 0.0, drone_rem = 0.0;

  friend bool operator==(const StateKey&, const StateKey&) = default;
};

struct StateKeyHash {
  std::size_t operator()(const StateKey& k) const noexcept {
    std::uint64_t h = k.demand;
    auto mix = [&h](std::uint64_t v) { h = (h ^ v) * 0x100000001B3ULL + (h >> 29); };
    mix(static_cast<std::uint64_t>(static_cast<std::uint8_t>(k.truck_loc)) |
        static_cast<std::uint64_t>(static_cast<std::uint8_t>(k.drone_loc)) << 8 |
        static_cast<std::uint64_t>(static_cast<std::uint8_t>(k.sortie)) << 16 |
        static_cast<std::uint64_t>(static_cast<std::uint8_t>(k.truck_target)) << 24 |
        static_cast<std::uint64_t>(static_cast<std::uint8_t>(k.drone_target)) << 32 |
        static_cast<std::uint64_t>(k.flags) << 40);
    mix(std::hash<double>{}(k.truck_rem));
    mix(std::hash<double>{}(k.drone_rem));
    return static_cast<std::size_t>(h);
  }
};

StateKey make_key(const State& s) {
  StateKey k;
  for (std::size_t i = 0; i < s.demand.size(); ++i) {
    if (s.demand[i] != 0) k.demand |= 1u << i;
  }
  k.truck_loc = static_cast<std::int8_t>(s.truck_loc);
  k.drone_loc = static_cast<std::int8_t>(s.drone_loc);
  k.sortie = static_cast<std::int8_t>(s.sortie_target);
  k.truck_target = static_cast<std::int8_t>(s.truck_pending.target);
  k.drone_target = static_cast<std::int8_t>(s.drone_pending.target);
  k.flags = static_cast<std::uint8_t>((s.drone_busy ? 1 : 0) | (s.drone_unreturned ? 2 : 0) | (s.drone_ready ? 4 : 0));
  k.truck_rem = s.truck_pending.remaining;
  k.drone_rem = s.drone_pending.remaining;
  return k;
}

class ExactSearch {
 public:
  ExactSearch(const Instance& inst, SearchOptions options, double upper_bound)
      : inst_(inst), options_(options), bound_(upper_bound) {}

  Plan run() {
    State s = reset(inst_).first;
    dfs(s);
    if (best_actions_.empty() && !is_terminal(s, inst_)) throw StateError("exact search found no plan");
    return Plan{best_actions_, best_cost_};
  }

  SearchStats stats;

 private:
  void dfs(const State& s) {
    ++stats.expanded;
    if (is_terminal(s, inst_)) {
      if (s.clock < best_cost_) {
        best_cost_ = s.clock;
        best_actions_ = path_;
        bound_ = std::min(bound_, best_cost_);
      }
      return;
    }
    if (options_.bound_pruning && completion_lower_bound(s, inst_) > bound_ + slack(bound_)) {
      ++stats.pruned_by_bound;
      return;
    }
    if (options_.memoize) {
      auto [it, inserted] = seen_.try_emplace(make_key(s), s.clock);
      if (!inserted) {
        if (it->second <= s.clock) {
          ++stats.pruned_by_memo;
          return;
        }
        it->second = s.clock;
      }
    }
    const Mask tm = action_masks(s, inst_, Phase::truck);
    for (int t = 0; t < inst_.size(); ++t) {
      if (tm[static_cast<std::size_t>(t)] == 0) continue;
      const Mask dm = action_masks(s, inst_, Phase::drone, t);
      for (int d = 0; d < inst_.size(); ++d) {
        if (dm[static_cast<std::size_t>(d)] == 0) continue;
        const JointAction a{t, d};
        StepResult r = step(s, a, inst_);
        path_.push_back(a);
        dfs(r.next);
        path_.pop_back();
      }
    }
  }

  static double slack(double v) { return std::isfinite(v) ? 1e-9 * std::max(1.0, std::abs(v)) : 0.0; }

  const Instance& inst_;
  SearchOptions options_;
  double bound_;
  double best_cost_ = std::numeric_limits<double>::infinity();
  std::vector<JointAction> best_actions_;
  std::vector<JointAction> path_;
  std::unordered_map<StateKey, double, StateKeyHash> seen_;
};

int nearest(const Mask& mask, const Instance& inst, const State& s, int from, bool customers_only) {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < inst.size(); ++i) {
    if (mask[static_cast<std::size_t>(i)] == 0) continue;
    if (customers_only && s.demand[static_cast<std::size_t>(i)] == 0) continue;
    const double d = inst.dist(from, i);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

int first_set(const Mask& mask) {
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] != 0) return static_cast<int>(i);
  }
  return -1;
}

template <typename Policy>
Plan rollout(const Instance& inst, Policy&& choose) {
  State s = reset(inst).first;
  Plan plan;
  const int limit = horizon(inst);
  for (int t = 0; t < limit && !is_terminal(s, inst); ++t) {
    const JointAction a = choose(s);
    StepResult r = step(s, a, inst);
    plan.actions.push_back(a);
    s = std::move(r.next);
  }
  if (!is_terminal(s, inst)) throw StateError("rollout exceeded the decode horizon");
  plan.cost = s.clock;
  return plan;
}

}  // namespace

Plan exact_optimum(const Instance& inst, SearchOptions options, SearchStats* stats) {
  inst.validate();
  if (inst.size() > kMaxExactNodes) {
    throw SizeError("exact search supports at most " + std::to_string(kMaxExactNodes) + " nodes, got " +
                    std::to_string(inst.size()));
  }
  const double upper = options.bound_pruning ? greedy_nearest(inst).cost : std::numeric_limits<double>::infinity();
  ExactSearch search(inst, options, upper);
  Plan plan = search.run();
  if (stats != nullptr) *stats = search.stats;
  return plan;
}

Plan greedy_nearest(const Instance& inst) {
  inst.validate();
  return rollout(inst, [&inst](const State& s) {
    const Mask tm = action_masks(s, inst, Phase::truck);
    int truck = nearest(tm, inst, s, s.truck_loc, true);
    if (truck < 0) truck = tm[static_cast<std::size_t>(inst.depot)] != 0 ? inst.depot : first_set(tm);
    const Mask dm = action_masks(s, inst, Phase::drone, truck);
    Mask launch = dm;
    if (!s.drone_busy) launch[static_cast<std::size_t>(truck)] = 0;
    int drone = nearest(launch, inst, s, s.drone_loc, true);
    if (drone < 0) drone = first_set(dm);
    return JointAction{truck, drone};
  });
}

Plan random_rollout(const Instance& inst, std::uint64_t seed) {
  inst.validate();
  SplitMix64 rng(seed);
  auto pick = [&rng](const Mask& mask) {
    const auto count = static_cast<std::uint64_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
    std::uint64_t k = rng.below(count);
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (mask[i] != 0 && k-- == 0) return static_cast<int>(i);
    }
    return -1;
  };
  return rollout(inst, [&](const State& s) {
    const int truck = pick(action_masks(s, inst, Phase::truck));
    const int drone = pick(action_masks(s, inst, Phase::drone, truck));
    return JointAction{truck, drone};
  });
}

}  // namespace tspd
