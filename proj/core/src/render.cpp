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

#include "tspd/render.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tspd/error.hpp"

namespace tspd {

namespace {

constexpr double kCanvas = 480.0;
constexpr double kMargin = 30.0;

struct Frame {
  double min_x, min_y, span;

  double x(double v) const { return kMargin + (v - min_x) / span * kCanvas; }
  double y(double v) const { return kMargin + kCanvas - (v - min_y) / span * kCanvas; }
};

Frame frame_of(const Instance& inst) {
  double lo_x = inst.coords[0].x, hi_x = lo_x, lo_y = inst.coords[0].y, hi_y = lo_y;
  for (const Point& p : inst.coords) {
    lo_x = std::min(lo_x, p.x);
    hi_x = std::max(hi_x, p.x);
    lo_y = std::min(lo_y, p.y);
    hi_y = std::max(hi_y, p.y);
  }
  const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-12});
  return {lo_x, lo_y, span};
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

std::string render_svg(const Trajectory& traj, const Instance& inst) {
  if (!traj.terminal()) throw StateError("render: trajectory is not terminal");
  const Frame f = frame_of(inst);
  const double size = kCanvas + 2 * kMargin;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(size) << "\" height=\"" << fmt(size + 20)
      << "\" viewBox=\"0 0 " << fmt(size) << ' ' << fmt(size + 20) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  const std::vector<Movement> moves = movements(traj, inst);
  std::vector<int> truck_path;
  for (const Movement& m : moves) {
    if (m.agent != Agent::truck) continue;
    if (truck_path.empty() || truck_path.back() != m.from) truck_path.push_back(m.from);
    truck_path.push_back(m.to);
  }
  if (!truck_path.empty()) {
    out << "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < truck_path.size(); ++i) {
      const Point& p = inst.coords[static_cast<std::size_t>(truck_path[i])];
      out << (i == 0 ? "" : " ") << fmt(f.x(p.x)) << ',' << fmt(f.y(p.y));
    }
    out << "\"/>\n";
  }
  for (const Movement& m : moves) {
    if (m.agent != Agent::drone) continue;
    const Point& a = inst.coords[static_cast<std::size_t>(m.from)];
    const Point& b = inst.coords[static_cast<std::size_t>(m.to)];
    out << "<line x1=\"" << fmt(f.x(a.x)) << "\" y1=\"" << fmt(f.y(a.y)) << "\" x2=\"" << fmt(f.x(b.x)) << "\" y2=\""
        << fmt(f.y(b.y)) << "\" stroke=\"#d9480f\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>\n";
  }
  for (std::size_t i = 0; i < inst.coords.size(); ++i) {
    const Point& p = inst.coords[i];
    const bool depot = static_cast<int>(i) == inst.depot;
    out << "<circle cx=\"" << fmt(f.x(p.x)) << "\" cy=\"" << fmt(f.y(p.y)) << "\" r=\"" << (depot ? "7" : "4")
        << "\" fill=\"" << (depot ? "#c92a2a" : "#343a40") << "\"/>\n";
  }
  out << "<text x=\"" << fmt(kMargin) << "\" y=\"" << fmt(size + 10)
      << "\" font-family=\"monospace\" font-size=\"14\">cost " << format_number(traj.total_cost) << "</text>\n";
  out << "</svg>\n";
  return out.str();
}

void render_route(const Trajectory& traj, const Instance& inst, const std::filesystem::path& path) {
  const std::string svg = render_svg(traj, inst);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << svg;
  if (!out) throw IoError("write failed for " + path.string());
}

void render_route(const Plan& plan, const Instance& inst, const std::filesystem::path& path) {
  render_route(replay(inst, plan.actions), inst, path);
}

}  // namespace tspd
