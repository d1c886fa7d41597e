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

#include "tspd/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <thread>

#include "tspd/error.hpp"

namespace tspd {

double gap(double z, double z_star) {
  if (!(z_star > 0.0)) throw ArgumentError("gap: baseline cost must be positive");
  return (z - z_star) / z_star * 100.0;
}

Strategy parse_strategy(std::string_view s) {
  if (s == "greedy") return Strategy::greedy;
  if (s == "sample" || s == "sampling") return Strategy::sample;
  throw ArgumentError("unknown strategy '" + std::string(s) + "' (expected greedy or sample)");
}

std::uint64_t sample_seed(std::uint64_t seed, std::size_t instance, std::size_t sample) noexcept {
  return mix_seed(mix_seed(seed, instance), sample);
}

Trajectory best_of_k(const Model& model, const Instance& inst, std::size_t k, std::uint64_t seed,
                     std::size_t instance_index) {
  if (k == 0) throw ArgumentError("best_of_k: k must be positive");
  Trajectory best;
  for (std::size_t s = 0; s < k; ++s) {
    Trajectory t = solve_sampled(model, inst, sample_seed(seed, instance_index, s));
    if (s == 0 || t.total_cost < best.total_cost) best = std::move(t);
  }
  return best;
}

std::size_t thread_cap(std::size_t fallback) {
  if (const char* env = std::getenv("TSPD_THREADS")) {
    std::size_t v = 0;
    const char* end = env + std::char_traits<char>::length(env);
    auto [p, ec] = std::from_chars(env, end, v);
    if (ec == std::errc() && p == end && v > 0) return v;
  }
  return std::max<std::size_t>(1, fallback);
}

EvalReport evaluate(const Model& model, const InstanceSet& set, const EvalOptions& opts) {
  if (opts.strategy == Strategy::sample && opts.k == 0) throw ArgumentError("evaluate: k must be positive");
  if (opts.baseline && opts.baseline->size() != set.instances.size()) {
    throw ArgumentError("evaluate: " + std::to_string(opts.baseline->size()) + " baseline costs for " +
                        std::to_string(set.instances.size()) + " instances");
  }
  EvalReport report;
  report.strategy = opts.strategy == Strategy::greedy ? "greedy" : "sampling_" + std::to_string(opts.k);
  report.rows.resize(set.instances.size());

  auto solve_one = [&](std::size_t j) {
    const Instance& inst = set.instances[j];
    const auto t0 = std::chrono::steady_clock::now();
    Trajectory traj = opts.strategy == Strategy::greedy ? solve_greedy(model, inst)
                                                        : best_of_k(model, inst, opts.k, opts.seed, j);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    InstanceResult& r = report.rows[j];
    r.index = j;
    r.cost = traj.total_cost;
    r.seconds = secs;
    r.trajectory = std::move(traj);
    if (opts.baseline) {
      r.baseline = (*opts.baseline)[j];
      r.gap = gap(r.cost, *r.baseline);
    }
  };

  const std::size_t workers = std::min(std::max<std::size_t>(1, opts.threads), set.instances.size());
  if (workers <= 1) {
    for (std::size_t j = 0; j < set.instances.size(); ++j) solve_one(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t j = next++; j < set.instances.size(); j = next++) solve_one(j);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  double cost = 0.0, secs = 0.0, g = 0.0;
  for (const auto& r : report.rows) {
    cost += r.cost;
    secs += r.seconds;
    if (r.gap) g += *r.gap;
  }
  const double inv = report.rows.empty() ? 0.0 : 1.0 / static_cast<double>(report.rows.size());
  report.mean_cost = cost * inv;
  report.mean_seconds = secs * inv;
  if (opts.baseline) report.mean_gap = g * inv;
  return report;
}

void write_report_csv(std::ostream& out, const EvalReport& report) {
  out << "instance,strategy,cost,baseline,gap,seconds\n";
  for (const auto& r : report.rows) {
    out << r.index << ',' << report.strategy << ',' << format_number(r.cost) << ','
        << (r.baseline ? format_number(*r.baseline) : "") << ',' << (r.gap ? format_number(*r.gap) : "") << ','
        << format_number(r.seconds) << '\n';
  }
  out << "mean," << report.strategy << ',' << format_number(report.mean_cost) << ",,"
      << (report.mean_gap ? format_number(*report.mean_gap) : "") << ',' << format_number(report.mean_seconds) << '\n';
}

void write_report_table(std::ostream& out, const EvalReport& report) {
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %-14s %12s %9s %10s\n", "instance", "strategy", "cost", "Gap", "Time(s)");
  out << line;
  auto row = [&](const std::string& label, double cost, const std::optional<double>& g, double secs) {
    char gbuf[32] = "-";
    if (g) std::snprintf(gbuf, sizeof gbuf, "%.2f%%", *g);
    std::snprintf(line, sizeof line, "%-10s %-14s %12.2f %9s %10.4f\n", label.c_str(), report.strategy.c_str(), cost,
                  gbuf, secs);
    out << line;
  };
  for (const auto& r : report.rows) row(std::to_string(r.index), r.cost, r.gap, r.seconds);
  row("mean", report.mean_cost, report.mean_gap, report.mean_seconds);
}

std::vector<double> read_baselines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open baseline file " + path.string());
  std::vector<double> costs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    double v = 0.0;
    const char* first = line.data() + b;
    const char* last = line.data() + e + 1;
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || p != last) throw ParseError(path.string(), lineno, "expected one cost per line");
    costs.push_back(v);
  }
  return costs;
}

void write_baselines(const std::filesystem::path& path, const std::vector<double>& costs) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write baseline file " + path.string());
  for (double c : costs) out << format_number(c) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace tspd
