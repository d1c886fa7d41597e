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


#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "generators.hpp"
#include "tspd/environment.hpp"
#include "tspd/error.hpp"

namespace tspd {
namespace {

Instance make(std::vector<Point> coords, int depot = 0, double alpha = 2.0) {
  Instance inst;
  inst.coords = std::move(coords);
  inst.depot = depot;
  inst.alpha = alpha;
  return inst;
}

TEST(Reset, AllDemandsUnmetAgentsAtDepot) {
  const Instance inst = make({{5, 5}, {0, 0}, {1, 2}, {3, 3}}, 1);
  const auto [s, mask] = reset(inst);
  EXPECT_EQ(s.demand, (std::vector<std::uint8_t>{1, 0, 1, 1}));
  EXPECT_EQ(s.truck_loc, 1);
  EXPECT_EQ(s.drone_loc, 1);
  EXPECT_FALSE(s.drone_busy);
  EXPECT_EQ(s.clock, 0.0);
  EXPECT_EQ(mask.size(), 4u);
}

TEST(Masks, SingleCustomerIsTheOnlyCustomerChoice) {
  const Instance inst = make({{0, 0}, {1, 0}});
  const auto [s, mask] = reset(inst);
  EXPECT_EQ(mask[1], 1);
  // The depot entry is the truck's wait-in-place option while the drone can fly.
  EXPECT_EQ(mask[0], 1);
  const Mask ride = action_masks(s, inst, Phase::drone, 1);
  EXPECT_EQ(ride, (Mask{0, 1}));
}

TEST(Masks, AllServedFunnelsToDepot) {
  const Instance inst = make({{0, 0}, {1, 0}, {0, 1}});
  State s = reset(inst).first;
  s.demand = {0, 0, 0};
  s.truck_loc = s.drone_loc = 2;
  s.truck_pending = s.drone_pending = PendingAction{2, 0.0};
  EXPECT_EQ(action_masks(s, inst, Phase::truck), (Mask{1, 0, 0}));
  EXPECT_EQ(action_masks(s, inst, Phase::drone, 0), (Mask{1, 0, 0}));
}

TEST(Masks, PendingTruckMustContinue) {
  const Instance inst = make({{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}, {5, 0}});
  State s = reset(inst).first;
  s.truck_pending = PendingAction{5, 2.0};
  EXPECT_EQ(action_masks(s, inst, Phase::truck), (Mask{0, 0, 0, 0, 0, 1}));
}

TEST(Masks, AirborneDroneReturnsToTruckNode) {
  const Instance inst = make({{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}});
  State s = reset(inst).first;
  s.demand = {0, 1, 0, 0, 1};
  s.truck_loc = 3;
  s.truck_pending = PendingAction{3, 0.0};
  s.drone_loc = 2;
  s.drone_pending = PendingAction{2, 0.0};
  s.drone_busy = s.drone_unreturned = true;
  check_invariants(s, inst);
  EXPECT_EQ(action_masks(s, inst, Phase::drone, 3), (Mask{0, 0, 0, 1, 0}));
}

TEST(Masks, DroneNeverSharesTheTrucksFreshCustomer) {
  const Instance inst = make({{0, 0}, {1, 0}, {2, 0}, {3, 0}});
  const State s = reset(inst).first;
  for (int truck = 1; truck < 4; ++truck) {
    const Mask dm = action_masks(s, inst, Phase::drone, truck);
    // Only the ride to the truck's customer, never a sortie to it.
    EXPECT_EQ(dm[static_cast<std::size_t>(truck)], 1);
    StepResult r = step(s, {truck, truck}, inst);
    EXPECT_FALSE(r.next.drone_busy);
  }
}

TEST(Step, HandComputedLaunch) {
  const Instance inst = make({{0, 0}, {3, 4}, {0, 2}});
  const State s = reset(inst).first;
  const StepResult r = step(s, {1, 2}, inst);
  EXPECT_DOUBLE_EQ(r.dt, 1.0);
  EXPECT_EQ(r.next.drone_loc, 2);
  EXPECT_TRUE(r.next.drone_busy);
  EXPECT_TRUE(r.next.drone_unreturned);
  EXPECT_EQ(r.next.demand[2], 0);
  EXPECT_EQ(r.next.truck_pending.target, 1);
  EXPECT_DOUBLE_EQ(r.next.truck_pending.remaining, 4.0);
  EXPECT_DOUBLE_EQ(r.next.clock, 1.0);
}

TEST(Step, IdleAgentsAtSameNodeLivelock) {
  const Instance inst = make({{0, 0}, {1, 0}});
  const State s = reset(inst).first;
  EXPECT_THROW(step(s, {0, 0}, inst), LivelockError);
}

TEST(Step, DroneWaitsAtRendezvousForTruck) {
  // |depot c1| = 5, |depot c2| = 2, |c2 c1| = 4.
  const Instance inst = make({{0, 0}, {3.25, std::sqrt(25.0 - 3.25 * 3.25)}, {2, 0}});
  ASSERT_NEAR(inst.dist(1, 2), 4.0, 1e-12);
  const StepResult launch = step(reset(inst).first, {1, 2}, inst);
  ASSERT_DOUBLE_EQ(launch.dt, 1.0);
  ASSERT_NEAR(launch.next.truck_pending.remaining, 4.0, 1e-12);
  const StepResult back = step(launch.next, {1, 1}, inst);
  EXPECT_NEAR(back.dt, 2.0, 1e-12);
  EXPECT_EQ(back.next.drone_loc, 1);
  EXPECT_TRUE(back.next.drone_busy);
  EXPECT_NEAR(back.next.truck_pending.remaining, 2.0, 1e-12);
  const StepResult dock = step(back.next, {1, 1}, inst);
  EXPECT_NEAR(dock.dt, 2.0, 1e-12);
  EXPECT_FALSE(dock.next.drone_busy);
  EXPECT_EQ(dock.next.drone_loc, dock.next.truck_loc);
}

TEST(Step, MaskedActionIsRejected) {
  const Instance inst = make({{0, 0}, {1, 0}, {2, 0}});
  State s = reset(inst).first;
  s = step(s, {1, 2}, inst).next;
  EXPECT_THROW(step(s, {2, 2}, inst), FeasibilityError);
  EXPECT_THROW(step(s, {7, 0}, inst), FeasibilityError);
}

TEST(Step, TerminalAcceptsOnlyTheDepotNoOp) {
  const Instance inst = make({{0, 0}, {1, 0}});
  const Trajectory t = replay(inst, {{1, 1}, {0, 0}});
  ASSERT_TRUE(t.terminal());
  const StepResult r = step(t.final_state, {0, 0}, inst);
  EXPECT_EQ(r.dt, 0.0);
  EXPECT_EQ(r.next, t.final_state);
  EXPECT_THROW(step(t.final_state, {1, 0}, inst), FeasibilityError);
}

TEST(EpisodeCost, DroneServesWhileTruckWaits) {
  const Instance inst = make({{0, 0}, {1, 0}});
  const Trajectory t = replay(inst, {{0, 1}, {0, 0}});
  EXPECT_DOUBLE_EQ(episode_cost(t), 1.0);
  EXPECT_DOUBLE_EQ(route_completion_time(t, inst), 1.0);
}

TEST(EpisodeCost, TruckServesAndReturns) {
  const Instance inst = make({{0, 0}, {1, 0}});
  const Trajectory t = replay(inst, {{1, 1}, {0, 0}});
  EXPECT_DOUBLE_EQ(episode_cost(t), 2.0);
}

TEST(EpisodeCost, NonTerminalIsStateError) {
  const Instance inst = make({{0, 0}, {1, 0}});
  EXPECT_THROW(episode_cost(replay(inst, {{1, 1}})), StateError);
}

TEST(Trajectory, WriteListsMovementsThenCost) {
  const Instance inst = make({{0, 0}, {1, 0}});
  std::ostringstream out;
  write_trajectory(out, replay(inst, {{0, 1}, {0, 0}}), inst);
  const std::string text = out.str();
  EXPECT_NE(text.find("drone 0 1"), std::string::npos);
  EXPECT_NE(text.find("cost 1"), std::string::npos);
}

TEST(Horizon, TwoNPlusTwo) { EXPECT_EQ(horizon(make({{0, 0}, {1, 0}, {2, 0}})), 8); }

TEST(EnvironmentProperty, RandomRolloutsStayFeasibleAndConserveTime) {
  SplitMix64 rng(404);
  for (int i = 0; i < 1000; ++i) {
    const Instance inst = testing::random_instance(rng, 2 + static_cast<int>(rng.below(10)));
    const testing::RolloutAudit a = testing::audited_rollout(inst, rng);
    ASSERT_TRUE(a.terminal) << "rollout " << i;
    ASSERT_EQ(a.mask_violations, 0);
    ASSERT_EQ(a.invariant_violations, 0);
    ASSERT_NEAR(a.dt_sum, a.clock, 1e-9);
  }
}

TEST(EnvironmentProperty, UnmetNeverGrowsAndClockAdvances) {
  SplitMix64 rng(505);
  for (int i = 0; i < 300; ++i) {
    const Instance inst = testing::random_instance(rng, 3 + static_cast<int>(rng.below(8)));
    State s = reset(inst).first;
    while (!is_terminal(s, inst)) {
      const int truck = testing::pick_uniform(rng, action_masks(s, inst, Phase::truck));
      const int drone = testing::pick_uniform(rng, action_masks(s, inst, Phase::drone, truck));
      const StepResult r = step(s, {truck, drone}, inst);
      ASSERT_EQ(step(s, {truck, drone}, inst).next, r.next);
      ASSERT_LE(r.next.unmet(), s.unmet());
      ASSERT_GT(r.next.clock, s.clock);
      s = r.next;
    }
  }
}

TEST(EnvironmentProperty, RouteReplayAgreesWithClock) {
  SplitMix64 rng(606);
  for (int i = 0; i < 300; ++i) {
    const Instance inst = testing::random_instance(rng, 2 + static_cast<int>(rng.below(9)));
    std::vector<JointAction> actions;
    State s = reset(inst).first;
    while (!is_terminal(s, inst)) {
      const int truck = testing::pick_uniform(rng, action_masks(s, inst, Phase::truck));
      const int drone = testing::pick_uniform(rng, action_masks(s, inst, Phase::drone, truck));
      actions.push_back({truck, drone});
      s = step(s, actions.back(), inst).next;
    }
    const Trajectory t = replay(inst, actions);
    ASSERT_NEAR(route_completion_time(t, inst), episode_cost(t), 1e-9);
    ASSERT_LE(static_cast<int>(actions.size()), horizon(inst));
  }
}

}  // namespace
}  // namespace tspd
