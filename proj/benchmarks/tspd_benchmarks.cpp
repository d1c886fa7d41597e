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


#include <benchmark/benchmark.h>

#include "tspd/encoder.hpp"
#include "tspd/environment.hpp"
#include "tspd/graph.hpp"
#include "tspd/oracle.hpp"

namespace tspd {
namespace {

constexpr std::size_t kHidden = 128;
constexpr std::size_t kHeads = 8;
constexpr std::size_t kSparse = 16;

nn::Matrix random_block(SplitMix64& rng, std::size_t rows, std::size_t cols) {
  nn::Matrix m(rows, cols);
  for (double& x : m.data()) x = rng.uniform() - 0.5;
  return m;
}

template <bool Dense>
void BM_Attention(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Instance inst = generate_instances(n, 1, 7, Family::random_corner_depot).instances[0];
  SplitMix64 rng(3);
  const std::size_t rows = static_cast<std::size_t>(n) + 1;
  const ExpanderGraph graph = build_expander_graph(random_block(rng, rows - 1, kHidden), inst.depot);
  const std::vector<int> buckets = relative_buckets(inst, kSparse);
  const nn::Matrix q = random_block(rng, rows, kHidden), k = random_block(rng, rows, kHidden),
                   v = random_block(rng, rows, kHidden), r = random_block(rng, kHeads * kSparse, kHidden / kHeads);
  for (auto _ : state) {
    nn::Tape tape(false);
    nn::Var out = Dense ? dense_graph_attention(tape.constant(q), tape.constant(k), tape.constant(v),
                                                tape.constant(r), graph, buckets, kHeads, kSparse)
                        : graph_attention(tape.constant(q), tape.constant(k), tape.constant(v), tape.constant(r),
                                          graph, buckets, kHeads, kSparse);
    benchmark::DoNotOptimize(out.value().data().data());
  }
  state.counters["edges"] = static_cast<double>(graph.edge_count());
}
BENCHMARK(BM_Attention<false>)->Name("sparse_attention")->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Attention<true>)->Name("dense_attention")->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMicrosecond);

void BM_ExactOptimum(benchmark::State& state) {
  const Instance inst =
      generate_instances(static_cast<int>(state.range(0)), 1, 11, Family::random_corner_depot).instances[0];
  for (auto _ : state) benchmark::DoNotOptimize(exact_optimum(inst).cost);
}
BENCHMARK(BM_ExactOptimum)->DenseRange(4, 7)->Unit(benchmark::kMillisecond);

void BM_GreedyRollout(benchmark::State& state) {
  const Instance inst =
      generate_instances(static_cast<int>(state.range(0)), 1, 13, Family::random_corner_depot).instances[0];
  for (auto _ : state) benchmark::DoNotOptimize(greedy_nearest(inst).cost);
  state.SetItemsProcessed(state.iterations() * horizon(inst));
}
BENCHMARK(BM_GreedyRollout)->Arg(20)->Arg(50)->Arg(100);

void BM_EnvironmentStep(benchmark::State& state) {
  const Instance inst = generate_instances(50, 1, 5, Family::random_corner_depot).instances[0];
  const State start = reset(inst).first;
  const Mask tm = action_masks(start, inst, Phase::truck);
  int truck = 0;
  while (tm[static_cast<std::size_t>(truck)] == 0) ++truck;
  const Mask dm = action_masks(start, inst, Phase::drone, truck);
  int drone = 0;
  while (dm[static_cast<std::size_t>(drone)] == 0) ++drone;
  for (auto _ : state) benchmark::DoNotOptimize(step(start, {truck, drone}, inst).dt);
}
BENCHMARK(BM_EnvironmentStep);

}  // namespace
}  // namespace tspd

BENCHMARK_MAIN();
