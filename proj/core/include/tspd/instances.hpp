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
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace tspd {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

enum class Agent { truck, drone };

std::string_view to_string(Agent agent) noexcept;

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

/// Euclidean distance.
double distance(Point a, Point b) noexcept;

/// A TSP-D problem: node coordinates, the depot index and the drone/truck speed
/// ratio. Every other node is a customer with unit demand.
struct Instance {
  std::vector<Point> coords;
  int depot = 0;
  double alpha = 2.0;
  double truck_speed = 1.0;

  int size() const noexcept { return static_cast<int>(coords.size()); }
  int customers() const noexcept { return size() - 1; }
  bool is_customer(int node) const noexcept { return node != depot; }

  double speed(Agent agent) const noexcept {
    return agent == Agent::truck ? truck_speed : alpha * truck_speed;
  }
  double dist(int i, int j) const noexcept { return distance(coords[i], coords[j]); }
  double time(Agent agent, int i, int j) const noexcept { return dist(i, j) / speed(agent); }

  /// Throws ValidationError when an invariant does not hold.
  void validate() const;

  friend bool operator==(const Instance&, const Instance&) = default;
};

/// d / v_t for the truck, d / (alpha v_t) for the drone.
double travel_time(Agent agent, double d, const Instance& inst);

/// Largest absolute coordinate, used to bring inputs to unit scale. Returns 1
/// for a degenerate instance with every node at the origin.
double coordinate_scale(const Instance& inst) noexcept;

enum class Family { random_corner_depot, uniform_random_depot, external };

std::string_view to_string(Family family) noexcept;
Family parse_family(std::string_view text);

struct InstanceSet {
  std::vector<Instance> instances;
  std::uint64_t seed = 0;
  Family family = Family::external;
  double scale = 100.0;

  friend bool operator==(const InstanceSet&, const InstanceSet&) = default;
};

/// Draws `count` instances with n nodes whose coordinates are i.i.d. uniform on
/// [0, scale]^2 using SplitMix64(seed). The corner-depot family uses node 0 as
/// the depot and moves it to (0, 0); the random-depot family picks the depot
/// index uniformly after the coordinates are drawn.
InstanceSet generate_instances(int n, int count, std::uint64_t seed, Family family,
                               double scale = 100.0);

// Text format: line 1 "n depot alpha", then n lines "x y". Numbers use the
// shortest representation that round-trips.
void write_instance(std::ostream& out, const Instance& inst);
Instance read_instance(std::istream& in, const std::string& source = "<stream>");
std::string format_instance(const Instance& inst);

void save_instance(const Instance& inst, const std::filesystem::path& path);
Instance load_instance(const std::filesystem::path& path);

/// Writes inst_0000.txt ... plus manifest.txt into `dir` (created if needed).
void save_instances(const InstanceSet& set, const std::filesystem::path& dir);

/// Reads a directory written by save_instances. Without a manifest the files
/// are loaded in name order and the set is tagged as external.
InstanceSet load_instances(const std::filesystem::path& dir);

}  // namespace tspd
