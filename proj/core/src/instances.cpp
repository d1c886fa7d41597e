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

#include "tspd/instances.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "tspd/error.hpp"
#include "tspd/rng.hpp"

namespace tspd {

namespace fs = std::filesystem;

std::string_view to_string(Agent agent) noexcept {
  return agent == Agent::truck ? "truck" : "drone";
}

double distance(Point a, Point b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

void Instance::validate() const {
  if (size() < 2) throw ValidationError("instance needs at least 2 nodes, got " + std::to_string(size()));
  if (depot < 0 || depot >= size()) {
    throw ValidationError("depot index " + std::to_string(depot) + " outside [0, " +
                          std::to_string(size()) + ")");
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ValidationError("alpha must be positive");
  if (!(truck_speed > 0.0) || !std::isfinite(truck_speed)) {
    throw ValidationError("truck speed must be positive");
  }
  for (const Point& p : coords) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw ValidationError("non-finite coordinate");
  }
}

double travel_time(Agent agent, double d, const Instance& inst) {
  if (d < 0.0 || std::isnan(d)) throw ArgumentError("travel distance must be non-negative");
  return d / inst.speed(agent);
}

double coordinate_scale(const Instance& inst) noexcept {
  double s = 0.0;
  for (const Point& p : inst.coords) s = std::max({s, std::abs(p.x), std::abs(p.y)});
  return s > 0.0 ? s : 1.0;
}

std::string_view to_string(Family family) noexcept {
  switch (family) {
    case Family::random_corner_depot:
      return "random-corner-depot";
    case Family::uniform_random_depot:
      return "uniform-random-depot";
    case Family::external:
      break;
  }
  return "external";
}

Family parse_family(std::string_view text) {
  if (text == "random-corner-depot" || text == "corner") return Family::random_corner_depot;
  if (text == "uniform-random-depot" || text == "uniform") return Family::uniform_random_depot;
  if (text == "external") return Family::external;
  throw ArgumentError("unknown instance family '" + std::string(text) + "'");
}

InstanceSet generate_instances(int n, int count, std::uint64_t seed, Family family, double scale) {
  if (n < 2) throw ArgumentError("n must be at least 2");
  if (count < 1) throw ArgumentError("count must be at least 1");
  if (scale != 1.0 && scale != 100.0) throw ArgumentError("scale must be 1 or 100");
  if (family == Family::external) throw ArgumentError("cannot generate the external family");

  SplitMix64 rng(seed);
  InstanceSet set;
  set.seed = seed;
  set.family = family;
  set.scale = scale;
  set.instances.reserve(static_cast<std::size_t>(count));
  for (int c = 0; c < count; ++c) {
    Instance inst;
    inst.coords.resize(static_cast<std::size_t>(n));
    for (Point& p : inst.coords) {
      p.x = rng.uniform() * scale;
      p.y = rng.uniform() * scale;
    }
    if (family == Family::random_corner_depot) {
      inst.depot = 0;
      inst.coords[0] = Point{0.0, 0.0};
    } else {
      inst.depot = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    }
    set.instances.push_back(std::move(inst));
  }
  return set;
}

std::string format_number(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, end);
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) fields.push_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

template <typename T>
T parse_number(std::string_view field, const std::string& source, std::size_t line, const char* what) {
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError(source, line, std::string("invalid ") + what + " '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

void write_instance(std::ostream& out, const Instance& inst) {
  out << inst.size() << ' ' << inst.depot << ' ' << format_number(inst.alpha) << '\n';
  for (const Point& p : inst.coords) out << format_number(p.x) << ' ' << format_number(p.y) << '\n';
}

std::string format_instance(const Instance& inst) {
  std::ostringstream out;
  write_instance(out, inst);
  return out.str();
}

Instance read_instance(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!split_fields(line).empty()) return true;
    }
    return false;
  };

  if (!next_line()) throw ParseError(source, line_no + 1, "missing header line 'n depot alpha'");
  auto header = split_fields(line);
  if (header.size() != 3) throw ParseError(source, line_no, "header must be 'n depot alpha'");
  const int n = parse_number<int>(header[0], source, line_no, "node count");
  const int depot = parse_number<int>(header[1], source, line_no, "depot index");
  const double alpha = parse_number<double>(header[2], source, line_no, "alpha");
  if (n < 2) throw ValidationError(source + ": node count must be at least 2");
  if (depot < 0 || depot >= n) {
    throw ValidationError(source + ": depot index " + std::to_string(depot) + " outside [0, " +
                          std::to_string(n) + ")");
  }

  Instance inst;
  inst.depot = depot;
  inst.alpha = alpha;
  inst.coords.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    if (!next_line()) throw ParseError(source, line_no + 1, "expected " + std::to_string(n) + " coordinate lines");
    auto fields = split_fields(line);
    if (fields.size() != 2) throw ParseError(source, line_no, "coordinate line must be 'x y'");
    inst.coords.push_back(Point{parse_number<double>(fields[0], source, line_no, "coordinate"),
                                parse_number<double>(fields[1], source, line_no, "coordinate")});
  }
  if (next_line()) throw ParseError(source, line_no, "trailing content after coordinates");
  try {
    inst.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(source + ": " + e.what());
  }
  return inst;
}

void save_instance(const Instance& inst, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_instance(out, inst);
  if (!out) throw IoError("failed writing " + path.string());
}

Instance load_instance(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_instance(in, path.string());
}

namespace {

std::string instance_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "inst_%04zu.txt", index);
  return buf;
}

}  // namespace

void save_instances(const InstanceSet& set, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  for (std::size_t i = 0; i < set.instances.size(); ++i) {
    save_instance(set.instances[i], dir / instance_file_name(i));
  }
  std::ofstream manifest(dir / "manifest.txt", std::ios::binary);
  if (!manifest) throw IoError("cannot write manifest in " + dir.string());
  manifest << "seed " << set.seed << '\n'
           << "family " << to_string(set.family) << '\n'
           << "scale " << format_number(set.scale) << '\n'
           << "count " << set.instances.size() << '\n';
  if (!set.instances.empty()) manifest << "n " << set.instances.front().size() << '\n';
}

InstanceSet load_instances(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError(dir.string() + " is not a directory");
  InstanceSet set;
  set.family = Family::external;
  set.scale = 0.0;

  const fs::path manifest_path = dir / "manifest.txt";
  std::size_t expected = 0;
  bool has_manifest = fs::exists(manifest_path);
  if (has_manifest) {
    std::ifstream in(manifest_path, std::ios::binary);
    std::string line;
    std::size_t line_no = 0;
    const std::string source = manifest_path.string();
    while (std::getline(in, line)) {
      ++line_no;
      auto fields = split_fields(line);
      if (fields.empty()) continue;
      if (fields.size() != 2) throw ParseError(source, line_no, "expected 'key value'");
      if (fields[0] == "seed") {
        set.seed = parse_number<std::uint64_t>(fields[1], source, line_no, "seed");
      } else if (fields[0] == "family") {
        try {
          set.family = parse_family(fields[1]);
        } catch (const ArgumentError& e) {
          throw ParseError(source, line_no, e.what());
        }
      } else if (fields[0] == "scale") {
        set.scale = parse_number<double>(fields[1], source, line_no, "scale");
      } else if (fields[0] == "count") {
        expected = parse_number<std::size_t>(fields[1], source, line_no, "count");
      }
    }
  }

  std::vector<fs::path> files;
  if (has_manifest) {
    for (std::size_t i = 0; i < expected; ++i) files.push_back(dir / instance_file_name(i));
  } else {
    for (const auto& entry : fs::directory_iterator(dir)) {
      const auto name = entry.path().filename().string();
      if (entry.is_regular_file() && name.rfind("inst_", 0) == 0 && entry.path().extension() == ".txt") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
  }

  for (const auto& f : files) set.instances.push_back(load_instance(f));
  for (const Instance& inst : set.instances) {
    if (inst.size() != set.instances.front().size() || inst.alpha != set.instances.front().alpha) {
      throw ValidationError(dir.string() + ": instances in a set must share n and alpha");
    }
  }
  return set;
}

}  // namespace tspd
