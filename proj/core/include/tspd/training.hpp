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

#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <memory>
#include <mutex>
#include <span>
#include <string_view>
#include <thread>
#include <vector>

#include "tspd/instances.hpp"
#include "tspd/model.hpp"
#include "tspd/optim.hpp"
#include "tspd/queue.hpp"

namespace tspd {

enum class TrainMode { sync, async };

TrainMode parse_train_mode(std::string_view s);

struct TrainConfig {
  int n = 10;
  std::size_t epochs = 10000;
  std::size_t batch = 64;
  double tau = 0.5;
  std::size_t val_interval = 200;
  std::size_t val_size = 100;
  double lr_actor = 1e-4;
  double lr_critic = 1e-4;
  std::uint64_t seed = 0;
  TrainMode mode = TrainMode::sync;
  Family family = Family::random_corner_depot;
  double scale = 100.0;
  std::size_t queue_capacity = 64;
  ModelConfig model;
  nn::AdaBeliefConfig optimizer;
  /// Output directory for metrics.csv and checkpoints; empty = keep in memory.
  std::filesystem::path out_dir;
  /// Fault injection for tests: the actor updater throws on this update (0 = never).
  std::uint64_t crash_actor_at = 0;

  /// K / 5, at least 1.
  std::uint64_t t_max() const noexcept;
  void validate() const;
};

struct LossValues {
  double actor = 0.0;
  double critic = 0.0;
  double mean_abs_advantage = 0.0;
};

/// A_i = cost_i - baseline_i; actor = mean(A_i * log_prob_sum_i);
/// critic = mean(A_i^2). Throws NumericError naming the first bad batch entry.
LossValues compute_losses(std::span<const double> costs, std::span<const double> baselines,
                          std::span<const double> log_prob_sums);

/// An epoch dispatches updates only when mean |A| > tau.
inline bool gate_open(double mean_abs_advantage, double tau) noexcept { return mean_abs_advantage > tau; }

enum class LossKind { actor, critic };

/// Gradient of one gated loss, ready for the owning updater.
struct LossPacket {
  LossKind kind = LossKind::actor;
  double loss = 0.0;
  nn::ParameterSet grads;
  std::uint64_t epoch = 0;
};

/// Sole writer of one parameter set: AdaBelief at the cosine learning rate of
/// its own update counter.
class Updater {
 public:
  Updater(nn::ParameterSet params, double lr_max, std::uint64_t t_max, nn::AdaBeliefConfig opt = {},
          std::uint64_t crash_at = 0);

  /// False when the step was skipped for non-finite gradients.
  bool apply(const LossPacket& packet);

  const nn::ParameterSet& params() const noexcept { return params_; }
  nn::ParameterSet& params() noexcept { return params_; }
  std::uint64_t updates() const noexcept { return updates_; }
  std::uint64_t skipped() const noexcept { return skipped_; }
  const std::vector<double>& lr_trace() const noexcept { return lr_trace_; }
  double current_lr() const;

 private:
  nn::ParameterSet params_;
  nn::AdaBelief opt_;
  double lr_max_;
  std::uint64_t t_max_;
  std::uint64_t crash_at_;
  std::uint64_t updates_ = 0;
  std::uint64_t skipped_ = 0;
  std::vector<double> lr_trace_;
};

/// Runs an Updater on its own thread behind a bounded queue and publishes an
/// immutable snapshot after every update.
class AsyncUpdater {
 public:
  AsyncUpdater(Updater updater, std::size_t capacity);
  ~AsyncUpdater();
  AsyncUpdater(const AsyncUpdater&) = delete;
  AsyncUpdater& operator=(const AsyncUpdater&) = delete;

  /// Blocks while the queue is full. Rethrows a worker failure.
  void submit(LossPacket packet);
  /// Waits until every submitted packet is applied. Rethrows a worker failure.
  void drain();
  std::shared_ptr<const nn::ParameterSet> snapshot() const;
  /// Learning rate the next update will use.
  double current_lr() const;
  /// Stops the worker and hands back the updater.
  Updater finish();

 private:
  void run();
  void rethrow_if_failed();

  Updater updater_;
  BoundedQueue<LossPacket> queue_;
  mutable std::mutex mu_;
  std::condition_variable applied_cv_;
  std::uint64_t submitted_ = 0;
  std::uint64_t applied_ = 0;
  std::exception_ptr error_;
  std::shared_ptr<const nn::ParameterSet> snapshot_;
  double next_lr_ = 0.0;
  std::thread worker_;
  bool finished_ = false;
};

struct EpochMetrics {
  std::uint64_t epoch = 0;
  double reward = 0.0;
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  double lr_actor = 0.0;
  double lr_critic = 0.0;
  double seconds = 0.0;
  double mean_abs_advantage = 0.0;
  bool dispatched = false;
};

struct ValidationRecord {
  std::uint64_t epoch = 0;
  double cost = 0.0;
};

struct TrainResult {
  Model initial;
  Model final_model;
  Model best;
  double best_validation = std::numeric_limits<double>::infinity();
  std::vector<EpochMetrics> metrics;
  std::vector<ValidationRecord> validations;
  std::vector<double> lr_trace_actor;
  std::vector<double> lr_trace_critic;
  std::uint64_t actor_updates = 0;
  std::uint64_t critic_updates = 0;
  std::uint64_t skipped_updates = 0;
};

/// Validation set: val_size instances from seed + 1.
InstanceSet validation_set(const TrainConfig& cfg);

/// Mean greedy cost over the set.
double validate(const Model& model, const InstanceSet& set);

/// Per-epoch rollout seed stream.
std::uint64_t epoch_seed(std::uint64_t seed, std::uint64_t epoch) noexcept;

/// Algorithm: per epoch, sample B instances, roll out the actor in sampling
/// mode, baseline with the critic, and dispatch gradient packets when the gate
/// opens. Validates every val_interval epochs and at the end. On a worker
/// failure writes last.ckpt (when out_dir is set) and rethrows.
TrainResult train(const TrainConfig& cfg, std::ostream* log = nullptr, const Model* init = nullptr);

void write_metrics_header(std::ostream& out);
void write_metrics_row(std::ostream& out, const EpochMetrics& m);

}  // namespace tspd
