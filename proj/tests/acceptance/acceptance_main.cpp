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


// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails. Pass criterion names as arguments to run
// a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "generators.hpp"
#include "grad_cases.hpp"
#include "tspd/decoder.hpp"
#include "tspd/encoder.hpp"
#include "tspd/evaluation.hpp"
#include "tspd/model.hpp"
#include "tspd/optim.hpp"
#include "tspd/oracle.hpp"
#include "tspd/training.hpp"

namespace tspd::acceptance {
namespace {

// Tolerances.
constexpr double kGapTolerancePoints = 0.01;
constexpr double kCostTolerance = 1e-9;
constexpr double kClockTolerance = 1e-9;
constexpr double kOptimizerTolerance = 1e-12;
constexpr double kAsyncTolerance = 1e-12;
constexpr double kSmokeGapLimitPercent = 20.0;

// Workloads.
constexpr int kFeasibilityRollouts = 10000;
constexpr int kOracleInstances = 50;
constexpr int kPrunedCheckMaxNodes = 5;
constexpr int kSmokeGapInstances = 30;
constexpr int kSmokeGapNodes = 7;
constexpr std::uint64_t kSmokeGapSeed = 77;
constexpr int kSamplingInstances = 20;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

struct PrintedGap {
  const char* dataset;
  const char* method;
  int n;
  double cost;
  double baseline;
  double gap_percent;
};

// Every (cost, baseline, printed gap) triple of the three published result
// tables: "random", "uniform" and "amsterdam" locations.
const PrintedGap kPrintedGaps[] = {
    {"random", "TSP-ep-all", 11, 230.07, 230.07, 0.00},
    {"random", "TSP-ep-all", 20, 281.62, 281.62, 0.00},
    {"random", "TSP-ep-all", 50, 397.17, 397.17, 0.00},
    {"random", "TSP-ep-all", 100, 535.67, 535.67, 0.00},
    {"random", "DPS/10", 20, 292.05, 281.62, 3.70},
    {"random", "DPS/10", 50, 420.61, 397.17, 5.90},
    {"random", "DPS/10", 100, 565.14, 535.67, 5.50},
    {"random", "HGVAC+", 11, 227.45, 230.07, -1.14},
    {"random", "HGVAC+", 20, 279.88, 281.62, -0.62},
    {"random", "HGVAC+", 50, 398.72, 397.17, 0.39},
    {"random", "HGVAC+", 100, 543.88, 535.67, 1.53},
    {"random", "HM(greedy)", 11, 233.21, 230.07, 1.36},
    {"random", "HM(greedy)", 20, 285.54, 281.62, 1.39},
    {"random", "HM(greedy)", 50, 408.84, 397.17, 2.94},
    {"random", "HM(greedy)", 100, 564.42, 535.67, 5.37},
    {"random", "Ours(greedy)", 11, 231.67, 230.07, 0.69},
    {"random", "Ours(greedy)", 20, 285.80, 281.62, 1.48},
    {"random", "Ours(greedy)", 50, 407.04, 397.17, 2.49},
    {"random", "Ours(greedy)", 100, 564.36, 535.67, 5.36},
    {"random", "HM(sampling_100)", 11, 230.10, 230.07, 0.01},
    {"random", "HM(sampling_100)", 20, 282.93, 281.62, 0.46},
    {"random", "HM(sampling_100)", 50, 399.59, 397.17, 0.61},
    {"random", "HM(sampling_100)", 100, 550.13, 535.67, 2.70},
    {"random", "Ours(sampling_100)", 11, 229.05, 230.07, -0.45},
    {"random", "Ours(sampling_100)", 20, 282.10, 281.62, 0.17},
    {"random", "Ours(sampling_100)", 50, 396.41, 397.17, -0.19},
    {"random", "Ours(sampling_100)", 100, 550.89, 535.67, 2.84},
    {"random", "HM(sampling_1200)", 11, 229.22, 230.07, -0.37},
    {"random", "HM(sampling_1200)", 20, 282.13, 281.62, 0.18},
    {"random", "HM(sampling_1200)", 50, 397.38, 397.17, 0.05},
    {"random", "HM(sampling_1200)", 100, 546.01, 535.67, 1.93},
    {"random", "Ours(sampling_1200)", 11, 228.55, 230.07, -0.66},
    {"random", "Ours(sampling_1200)", 20, 280.80, 281.62, -0.29},
    {"random", "Ours(sampling_1200)", 50, 392.94, 397.17, -1.06},
    {"random", "Ours(sampling_1200)", 100, 544.41, 535.67, 1.63},
    {"random", "HM(sampling_2400)", 11, 229.12, 230.07, -0.42},
    {"random", "HM(sampling_2400)", 20, 281.84, 281.62, 0.08},
    {"random", "HM(sampling_2400)", 50, 397.01, 397.17, -0.04},
    {"random", "HM(sampling_2400)", 100, 545.13, 535.67, 1.77},
    {"random", "Ours(sampling_2400)", 11, 228.36, 230.07, -0.74},
    {"random", "Ours(sampling_2400)", 20, 280.67, 281.62, -0.34},
    {"random", "Ours(sampling_2400)", 50, 392.07, 397.17, -1.28},
    {"random", "Ours(sampling_2400)", 100, 543.18, 535.67, 1.40},
    {"random", "HM(sampling_4800)", 11, 228.93, 230.07, -0.50},
    {"random", "HM(sampling_4800)", 20, 281.67, 281.62, 0.02},
    {"random", "HM(sampling_4800)", 50, 396.31, 397.17, -0.22},
    {"random", "HM(sampling_4800)", 100, 544.42, 535.67, 1.63},
    {"random", "Ours(sampling_4800)", 11, 228.30, 230.07, -0.77},
    {"random", "Ours(sampling_4800)", 20, 280.44, 281.62, -0.42},
    {"random", "Ours(sampling_4800)", 50, 391.51, 397.17, -1.42},
    {"random", "Ours(sampling_4800)", 100, 542.21, 535.67, 1.22},
    {"uniform", "HM(greedy)", 11, 228.38, 227.75, 0.28},
    {"uniform", "HM(greedy)", 20, 277.87, 276.05, 0.66},
    {"uniform", "HM(greedy)", 50, 426.93, 409.48, 4.26},
    {"uniform", "HM(sampling_100)", 11, 228.38, 227.75, 0.28},
    {"uniform", "HM(sampling_100)", 20, 276.95, 276.05, 0.33},
    {"uniform", "HM(sampling_100)", 50, 413.22, 409.48, 0.91},
    {"uniform", "HM(sampling_1200)", 11, 227.98, 227.75, 0.10},
    {"uniform", "HM(sampling_1200)", 20, 276.09, 276.05, 0.02},
    {"uniform", "HM(sampling_1200)", 50, 410.57, 409.48, 0.27},
    {"uniform", "HM(sampling_2400)", 11, 227.75, 227.75, 0.00},
    {"uniform", "HM(sampling_2400)", 20, 276.09, 276.05, 0.02},
    {"uniform", "HM(sampling_2400)", 50, 409.94, 409.48, 0.11},
    {"uniform", "HM(sampling_4800)", 11, 227.75, 227.75, 0.00},
    {"uniform", "HM(sampling_4800)", 20, 276.05, 276.05, 0.00},
    {"uniform", "HM(sampling_4800)", 50, 409.48, 409.48, 0.00},
    {"uniform", "Ours(greedy)", 11, 228.38, 227.75, 0.28},
    {"uniform", "Ours(greedy)", 20, 279.23, 276.05, 1.15},
    {"uniform", "Ours(greedy)", 50, 425.68, 409.48, 3.96},
    {"uniform", "Ours(sampling_100)", 11, 227.76, 227.75, 0.00},
    {"uniform", "Ours(sampling_100)", 20, 275.51, 276.05, -0.19},
    {"uniform", "Ours(sampling_100)", 50, 412.42, 409.48, 0.72},
    {"uniform", "Ours(sampling_1200)", 11, 227.49, 227.75, -0.12},
    {"uniform", "Ours(sampling_1200)", 20, 273.60, 276.05, -0.89},
    {"uniform", "Ours(sampling_1200)", 50, 408.23, 409.48, -0.31},
    {"uniform", "Ours(sampling_2400)", 11, 227.49, 227.75, -0.12},
    {"uniform", "Ours(sampling_2400)", 20, 273.00, 276.05, -1.10},
    {"uniform", "Ours(sampling_2400)", 50, 407.43, 409.48, -0.50},
    {"uniform", "Ours(sampling_4800)", 11, 227.49, 227.75, -0.12},
    {"uniform", "Ours(sampling_4800)", 20, 273.00, 276.05, -1.10},
    {"uniform", "Ours(sampling_4800)", 50, 407.09, 409.48, -0.58},
    {"amsterdam", "TSP-ep-all", 20, 2.36, 2.36, 0.00},
    {"amsterdam", "TSP-ep-all", 50, 3.27, 3.27, 0.00},
    {"amsterdam", "DPS/10", 20, 3.14, 2.36, 33.20},
    {"amsterdam", "DPS/10", 50, 3.80, 3.27, 16.49},
    {"amsterdam", "DPS/25", 50, 4.23, 3.27, 29.46},
    {"amsterdam", "HGVAC+", 20, 2.34, 2.36, -0.79},
    {"amsterdam", "HGVAC+", 50, 3.33, 3.27, 2.10},
    {"amsterdam", "HM(sampling_4800)", 20, 2.38, 2.36, 1.00},
    {"amsterdam", "HM(sampling_4800)", 50, 3.31, 3.27, 1.37},
    {"amsterdam", "Ours(sampling_4800)", 20, 2.34, 2.36, -0.70},
    {"amsterdam", "Ours(sampling_4800)", 50, 3.29, 3.27, 0.76},
};

Outcome gap_arithmetic() {
  int mismatches = 0;
  std::string where;
  for (const PrintedGap& p : kPrintedGaps) {
    const double g = gap(p.cost, p.baseline);
    if (std::abs(g - p.gap_percent) > kGapTolerancePoints + 1e-12) {
      ++mismatches;
      if (where.size() < 160) {
        where += std::string(" ") + p.dataset + "/" + p.method + "/N=" + std::to_string(p.n) + fmt(":%.2f", g) +
                 fmt("vs%.2f", p.gap_percent);
      }
    }
  }
  const int total = static_cast<int>(std::size(kPrintedGaps));
  return {mismatches == 0, std::to_string(total - mismatches) + "/" + std::to_string(total) +
                               " pairs within 0.01 points" + (mismatches > 0 ? "; off:" + where : "")};
}

Outcome oracle_equivalence() {
  const Model model = init_model(ModelConfig::with_hidden(16, 2, 1, 32), 3);
  int below = 0, pruned_mismatch = 0, pruned_checked = 0, solvers = 0;
  for (int i = 0; i < kOracleInstances; ++i) {
    const int n = 3 + i % 5;
    const Instance inst = generate_instances(n, 1, mix_seed(500, static_cast<std::uint64_t>(i)),
                                             i % 2 == 0 ? Family::random_corner_depot : Family::uniform_random_depot)
                              .instances[0];
    const double opt = exact_optimum(inst).cost;
    std::vector<double> costs = {
        replay_cost(inst, greedy_nearest(inst)),
        replay_cost(inst, random_rollout(inst, static_cast<std::uint64_t>(i))),
        solve_greedy(model, inst).total_cost,
        best_of_k(model, inst, 8, 1, static_cast<std::size_t>(i)).total_cost,
    };
    for (double c : costs) {
      ++solvers;
      if (c < opt - kCostTolerance * std::max(1.0, opt)) ++below;
    }
    if (n <= kPrunedCheckMaxNodes) {
      ++pruned_checked;
      if (exact_optimum(inst, {false, false}).cost != opt) ++pruned_mismatch;
    }
  }
  return {below == 0 && pruned_mismatch == 0,
          std::to_string(solvers) + " solver runs, " + std::to_string(below) + " below optimum; pruned vs plain on " +
              std::to_string(pruned_checked) + " instances, " + std::to_string(pruned_mismatch) + " differ"};
}

Outcome feasibility() {
  SplitMix64 rng(9001);
  int mask = 0, invariant = 0, clock = 0, unfinished = 0;
  double worst = 0.0;
  for (int i = 0; i < kFeasibilityRollouts; ++i) {
    const Instance inst = testing::random_instance(rng, 2 + static_cast<int>(rng.below(11)));
    const testing::RolloutAudit a = testing::audited_rollout(inst, rng);
    mask += a.mask_violations;
    invariant += a.invariant_violations;
    unfinished += a.terminal ? 0 : 1;
    const double err = std::abs(a.dt_sum - a.clock);
    worst = std::max(worst, err);
    if (err > kClockTolerance) ++clock;
  }
  return {mask == 0 && invariant == 0 && clock == 0 && unfinished == 0,
          std::to_string(kFeasibilityRollouts) + " rollouts: " + std::to_string(mask) + " mask, " +
              std::to_string(invariant) + " invariant, " + std::to_string(unfinished) + " unfinished; max |sum dt - clock| " +
              fmt("%.2e", worst)};
}

Outcome gradient_checks() {
  std::vector<testing::GradCase> cases = testing::op_grad_cases();
  cases.push_back(testing::tiny_model_case());
  double worst = 0.0;
  std::string worst_name;
  int failed = 0;
  for (const testing::GradCase& c : cases) {
    const testing::GradientReport r = testing::check_gradients(c.inputs, c.loss);
    if (r.worst >= testing::kGradientTolerance) ++failed;
    if (r.worst >= worst) {
      worst = r.worst;
      worst_name = c.name + ":" + r.worst_name;
    }
  }
  return {failed == 0, std::to_string(cases.size()) + " cases, worst relative error " + fmt("%.2e", worst) + " (" +
                           worst_name + ")"};
}

Outcome optimizer_schedule() {
  nn::ParameterSet p, g;
  p.add("w", nn::Matrix::scalar(0.0));
  g.add("w", nn::Matrix::scalar(1.0));
  nn::AdaBelief opt(p, {0.9, 0.999, 1e-16, 0.0});
  opt.step(p, g, 0.001);
  const double expected = -0.001 * 0.1 / (std::sqrt(8.1e-4) + 1e-16);
  const double step_err = std::abs(p.get("w")[0] - expected);
  bool ok = step_err <= kOptimizerTolerance;

  const double eta = 1e-4, eta_min = 0.01 * eta;
  ok = ok && nn::cosine_lr(0, 100, eta) == eta;
  ok = ok && nn::cosine_lr(50, 100, eta) == (eta + eta_min) / 2.0;
  const std::uint64_t big = 1000000;
  const double tail = nn::cosine_lr(big - 1, big, eta) - eta_min;
  ok = ok && tail >= 0.0 && tail <= 1e-11 * eta;

  const std::uint64_t epochs = 500, t_max = epochs / 5;
  nn::ParameterSet q;
  q.add("w", nn::Matrix::scalar(1.0));
  Updater u(q, eta, t_max);
  for (std::uint64_t t = 0; t < epochs; ++t) u.apply({LossKind::actor, 0.0, g, t});
  int periodic_mismatch = 0;
  for (std::uint64_t t = 0; t < epochs; ++t) {
    if (u.lr_trace()[t] != nn::cosine_lr(t % t_max, t_max, eta)) ++periodic_mismatch;
    if (t >= t_max && u.lr_trace()[t] != u.lr_trace()[t - t_max]) ++periodic_mismatch;
  }
  ok = ok && periodic_mismatch == 0;
  return {ok, "step error " + fmt("%.1e", step_err) + ", endpoints exact, tail " + fmt("%.2e", tail) +
                  ", five-cycle mismatches " + std::to_string(periodic_mismatch)};
}

Outcome sparse_attention() {
  const EncoderConfig cfg;
  const std::size_t sizes[] = {11, 20, 50, 100};
  const std::size_t expected_k[] = {4, 5, 6, 7};
  bool ok = true;
  std::size_t nonzero_masked = 0, over_bound = 0;
  std::string ks;
  for (std::size_t s = 0; s < 4; ++s) {
    ok = ok && knn_count(sizes[s]) == expected_k[s];
    nn::ParameterSet params;
    SplitMix64 rng(17 + s);
    add_encoder_parameters(params, cfg, "e.", rng);
    const Instance inst =
        generate_instances(static_cast<int>(sizes[s]), 1, 40 + s, Family::random_corner_depot).instances[0];
    nn::Tape tape(false);
    const EncoderOutput out = encode(tape, inst, params, cfg, "e.", {AttentionImpl::sparse, true});
    ok = ok && out.graph.k == expected_k[s];
    ks += " " + std::to_string(sizes[s]) + "->" + std::to_string(out.graph.k);
    if (out.attention.size() != cfg.layers * cfg.heads) ok = false;
    for (const nn::Matrix& w : out.attention) {
      for (std::size_t i = 0; i < out.graph.size(); ++i) {
        for (std::size_t j = 0; j < out.graph.size(); ++j) {
          if (!out.graph.connected(i, j) && w(i, j) != 0.0) ++nonzero_masked;
        }
      }
    }
    for (std::size_t i = 0; i < out.graph.real_nodes; ++i) {
      std::size_t degree = 0;
      for (std::size_t j = 0; j < out.graph.size(); ++j) degree += out.graph.connected(i, j) ? 1 : 0;
      if (degree > row_degree_bound(out.graph, i)) ++over_bound;
    }
  }
  ok = ok && nonzero_masked == 0 && over_bound == 0;
  return {ok, "k:" + ks + "; masked weights non-zero " + std::to_string(nonzero_masked) + "; rows over bound " +
                  std::to_string(over_bound)};
}

Outcome mgu_economy() {
  bool ok = true;
  std::string detail;
  for (std::size_t d : {8u, 32u, 128u}) {
    DecoderConfig c{d, 1, 10.0};
    nn::ParameterSet p;
    SplitMix64 rng(1);
    add_decoder_parameters(p, c, "d.", rng);
    std::size_t stored = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p.name(i).rfind("d.mgu0.", 0) == 0) stored += p.at(i).size();
    }
    const std::size_t lstm = recurrent_cell_parameters(CellKind::lstm, d, d);
    const std::size_t gru = recurrent_cell_parameters(CellKind::gru, d, d);
    ok = ok && 2 * stored == lstm && 3 * stored == 2 * gru;
    detail += " D=" + std::to_string(d) + ":" + std::to_string(stored) + "/" + std::to_string(lstm) + "/" +
              std::to_string(gru);
  }
  return {ok, "mgu/lstm/gru" + detail};
}

// Fixed configuration of the smoke run.
TrainConfig smoke_config() {
  TrainConfig c;
  c.n = 10;
  c.batch = 64;
  c.epochs = 500;
  c.mode = TrainMode::sync;
  c.seed = 2026;
  c.val_interval = 50;
  c.val_size = 100;
  c.lr_actor = 2e-3;
  c.lr_critic = 1e-2;
  c.model = ModelConfig::with_hidden(32, 4, 2, 64);
  return c;
}

Outcome training_smoke() {
  const auto start = std::chrono::steady_clock::now();
  const TrainConfig cfg = smoke_config();
  const TrainResult r = train(cfg);
  const InstanceSet val = validation_set(cfg);
  const double trained = validate(r.final_model, val);
  double random_mean = 0.0;
  for (std::size_t i = 0; i < val.instances.size(); ++i) random_mean += random_rollout(val.instances[i], i).cost;
  random_mean /= static_cast<double>(val.instances.size());

  const InstanceSet small =
      generate_instances(kSmokeGapNodes, kSmokeGapInstances, kSmokeGapSeed, Family::random_corner_depot);
  double mean_gap = 0.0;
  for (const Instance& inst : small.instances) mean_gap += gap(solve_greedy(r.final_model, inst).total_cost, exact_optimum(inst).cost);
  mean_gap /= static_cast<double>(small.instances.size());

  // Held-out critic quality against the constant mean-cost predictor.
  const InstanceSet held = generate_instances(cfg.n, 64, cfg.seed + 3, cfg.family, cfg.scale);
  std::vector<double> costs, preds;
  for (const Instance& inst : held.instances) {
    costs.push_back(solve_sampled(r.final_model, inst, costs.size()).total_cost);
    nn::Tape tape(false);
    preds.push_back(predict_cost(tape, r.final_model, inst).value()[0]);
  }
  double mean = 0.0, mse_critic = 0.0, mse_const = 0.0;
  for (double c : costs) mean += c;
  mean /= static_cast<double>(costs.size());
  for (std::size_t i = 0; i < costs.size(); ++i) {
    mse_critic += (costs[i] - preds[i]) * (costs[i] - preds[i]);
    mse_const += (costs[i] - mean) * (costs[i] - mean);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool ok = trained < random_mean && mean_gap <= kSmokeGapLimitPercent;
  return {ok, "greedy validation " + fmt("%.2f", trained) + " vs random " + fmt("%.2f", random_mean) +
                  "; n=7 mean gap " + fmt("%.2f%%", mean_gap) + " (limit 20%)" + "; critic mse " +
                  fmt("%.0f", mse_critic / costs.size()) + " vs constant " + fmt("%.0f", mse_const / costs.size()) +
                  "; " + fmt("%.0f s", secs)};
}

Outcome priority_gate() {
  TrainConfig c;
  c.n = 6;
  c.epochs = 3;
  c.batch = 8;
  c.val_interval = 3;
  c.val_size = 2;
  c.seed = 12;
  c.lr_actor = c.lr_critic = 1e-2;
  c.model = testing::tiny_model_config();
  c.tau = std::numeric_limits<double>::infinity();
  const TrainResult r = train(c);
  const bool frozen = r.final_model.actor == r.initial.actor && r.final_model.critic == r.initial.critic &&
                      r.actor_updates == 0 && r.critic_updates == 0;

  // One scripted epoch whose advantages average 0.4 in magnitude.
  const double costs[] = {10.4, 9.6, 10.4, 9.6};
  const double baselines[] = {10.0, 10.0, 10.0, 10.0};
  const double log_probs[] = {-1.0, -2.0, -3.0, -4.0};
  const LossValues losses = compute_losses(costs, baselines, log_probs);
  Updater actor(r.initial.actor, 1e-2, 1);
  const nn::ParameterSet before = actor.params();
  nn::ParameterSet grads = before.zeros_like();
  for (std::size_t i = 0; i < grads.size(); ++i) grads.at(i).fill(1.0);
  if (gate_open(losses.mean_abs_advantage, 0.5)) actor.apply({LossKind::actor, losses.actor, grads, 0});
  const bool gated = std::abs(losses.mean_abs_advantage - 0.4) < 1e-12 && actor.params() == before &&
                     actor.updates() == 0;
  return {frozen && gated, std::string("tau=inf run ") + (frozen ? "bit-identical" : "CHANGED") + "; mean|A|=" +
                               fmt("%.3f", losses.mean_abs_advantage) + " at tau=0.5 " +
                               (gated ? "no update" : "UPDATED")};
}

Outcome sampling_monotonicity() {
  const Model model = init_model(ModelConfig::with_hidden(16, 2, 1, 32), 21);
  const InstanceSet set = generate_instances(10, kSamplingInstances, 606, Family::random_corner_depot);
  int violations = 0;
  double improve = 0.0;
  for (std::size_t j = 0; j < set.instances.size(); ++j) {
    double last = std::numeric_limits<double>::infinity(), first = 0.0;
    for (std::size_t k : {1u, 10u, 100u}) {
      const double c = best_of_k(model, set.instances[j], k, 99, j).total_cost;
      if (k == 1) first = c;
      if (c > last) ++violations;
      last = c;
    }
    improve += gap(first, last);
  }
  return {violations == 0, std::to_string(violations) + " increases over " + std::to_string(set.instances.size()) +
                               " instances; mean k=1 over k=100 excess " +
                               fmt("%.1f%%", improve / static_cast<double>(set.instances.size()))};
}

Outcome async_consistency() {
  const Model model = init_model(testing::tiny_model_config(), 8);
  SplitMix64 rng(77);
  std::vector<LossPacket> packets;
  for (std::uint64_t e = 0; e < 3; ++e) {
    nn::ParameterSet g = model.actor.zeros_like();
    for (std::size_t i = 0; i < g.size(); ++i) g.at(i) = testing::random_matrix(rng, g.at(i).rows(), g.at(i).cols());
    packets.push_back({LossKind::actor, 1.0, std::move(g), e});
  }
  Updater sync(model.actor, 1e-3, 2);
  AsyncUpdater async(Updater(model.actor, 1e-3, 2), 64);
  for (const LossPacket& p : packets) {
    sync.apply(p);
    async.submit(p);
  }
  async.drain();
  const double diff = nn::max_abs_difference(*async.snapshot(), sync.params());
  const Updater done = async.finish();
  const bool ok = diff <= kAsyncTolerance && done.updates() == 3 && done.lr_trace() == sync.lr_trace() &&
                  !(sync.params() == model.actor);
  return {ok, "3 packets, max |async - sync| " + fmt("%.1e", diff)};
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace tspd::acceptance

int main(int argc, char** argv) {
  using namespace tspd::acceptance;
  const std::vector<Criterion> criteria = {
      {"gap_arithmetic", gap_arithmetic},
      {"oracle_equivalence", oracle_equivalence},
      {"feasibility", feasibility},
      {"gradient_checks", gradient_checks},
      {"optimizer_schedule", optimizer_schedule},
      {"sparse_attention", sparse_attention},
      {"mgu_economy", mgu_economy},
      {"training_smoke", training_smoke},
      {"priority_gate", priority_gate},
      {"sampling_monotonicity", sampling_monotonicity},
      {"async_consistency", async_consistency},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    if (argc > 1 && std::find_if(argv + 1, argv + argc, [&](const char* a) { return c.name == std::string(a); }) ==
                        argv + argc) {
      continue;
    }
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
