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

#include <filesystem>
#include <string>

#include "tspd/environment.hpp"
#include "tspd/instances.hpp"
#include "tspd/oracle.hpp"

namespace tspd {

/// SVG drawing: one circle per node (depot filled differently), a solid
/// polyline through the truck legs, one dashed line per drone flight, and a
/// cost caption. Throws StateError for a non-terminal trajectory.
std::string render_svg(const Trajectory& traj, const Instance& inst);

/// Writes render_svg() to `path`. Throws IoError on failure.
void render_route(const Trajectory& traj, const Instance& inst, const std::filesystem::path& path);
void render_route(const Plan& plan, const Instance& inst, const std::filesystem::path& path);

}  // namespace tspd
