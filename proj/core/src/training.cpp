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

#include "tspd/training.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>

#include "tspd/error.hpp"
#include "tspd/ops.hpp"

namespace tspd {

TrainMode parse_train_mode(std::string_view s) {
  if (s == "sync") return TrainMode::sync;
  if (s == "async") return TrainMode::async;
  throw ArgumentError("unknown training mode '" + std::string(s) + "' (expected sync or async)");
}

std::uint64_t TrainConfig::t_max() const noexcept { return std::max<std::uint64_t>(1, epochs / 5); }

void TrainConfig::validate() const {
  if (n < 2) throw ArgumentError("train: n must be at least 2");
  if (epochs == 0 || batch == 0) throw ArgumentError("train: epochs and batch must be positive");
  if (!(tau >= 0.0)) throw ArgumentError("train: tau must be non-negative");
  if (val_interval == 0 || val_size == 0) throw ArgumentError("train: validation interval and size must be positive");
  if (!(lr_actor > 0.0) || !(lr_critic > 0.0)) throw ArgumentError("train: learning rates must be positive");
  if (family == Family::external) throw ArgumentError("train: instances must come from a generated family");
  model.validate();
}

LossValues compute_losses(std::span<const double> costs, std::span<const double> baselines,
                          std::span<const double> log_prob_sums) {
  if (costs.size() != baselines.size() || costs.size() != log_prob_sums.size()) {
    throw ArgumentError("compute_losses: batch sizes differ");
  }
  if (costs.empty()) throw ArgumentError("compute_losses: empty batch");
  LossValues out;
  for (std::size_t i = 0; i < costs.size(); ++i) {
    const double a = costs[i] - baselines[i];
    if (!std::isfinite(a) || !std::isfinite(log_prob_sums[i])) {
      throw NumericError("non-finite loss term at batch index " + std::to_string(i));
    }
    out.actor += a * log_prob_sums[i];
    out.critic += a * a;
    out.mean_abs_advantage += std::abs(a);
  }
  const double inv = 1.0 / static_cast<double>(costs.size());
  out.actor *= inv;
  out.critic *= inv;
  out.mean_abs_advantage *= inv;
  return out;
}

Updater::Updater(nn::ParameterSet params, double lr_max, std::uint64_t t_max, nn::AdaBeliefConfig opt,
                 std::uint64_t crash_at)
    : params_(std::move(params)), opt_(params_, opt), lr_max_(lr_max), t_max_(t_max), crash_at_(crash_at) {}

double Updater::current_lr() const { return nn::cosine_lr(updates_, t_max_, lr_max_); }

bool Updater::apply(const LossPacket& packet) {
  if (crash_at_ != 0 && updates_ + 1 == crash_at_) throw Error("injected updater failure");
  const double lr = current_lr();
  try {
    opt_.step(params_, packet.grads, lr);
  } catch (const NumericError&) {
    ++skipped_;
    return false;
  }
  lr_trace_.push_back(lr);
  ++updates_;
  return true;
}

AsyncUpdater::AsyncUpdater(Updater updater, std::size_t capacity)
    : updater_(std::move(updater)),
      queue_(capacity),
      snapshot_(std::make_shared<const nn::ParameterSet>(updater_.params())),
      next_lr_(updater_.current_lr()),
      worker_([this] { run(); }) {}

AsyncUpdater::~AsyncUpdater() {
  queue_.close();
  if (worker_.joinable()) worker_.join();
}

void AsyncUpdater::run() {
  while (auto packet = queue_.pop()) {
    try {
      updater_.apply(*packet);
      auto snap = std::make_shared<const nn::ParameterSet>(updater_.params());
      const double lr = updater_.current_lr();
      std::lock_guard lock(mu_);
      snapshot_ = std::move(snap);
      next_lr_ = lr;
      ++applied_;
    } catch (...) {
      {
        std::lock_guard lock(mu_);
        error_ = std::current_exception();
      }
      applied_cv_.notify_all();
      queue_.close();
      return;
    }
    applied_cv_.notify_all();
  }
}

void AsyncUpdater::rethrow_if_failed() {
  std::exception_ptr e;
  {
    std::lock_guard lock(mu_);
    e = error_;
  }
  if (e) std::rethrow_exception(e);
}

void AsyncUpdater::submit(LossPacket packet) {
  rethrow_if_failed();
  {
    std::lock_guard lock(mu_);
    ++submitted_;
  }
  if (!queue_.push(std::move(packet))) {
    rethrow_if_failed();
    throw StateError("updater queue closed");
  }
}

void AsyncUpdater::drain() {
  {
    std::unique_lock lock(mu_);
    applied_cv_.wait(lock, [&] { return error_ != nullptr || applied_ == submitted_; });
  }
  rethrow_if_failed();
}

double AsyncUpdater::current_lr() const {
  std::lock_guard lock(mu_);
  return next_lr_;
}

std::shared_ptr<const nn::ParameterSet> AsyncUpdater::snapshot() const {
  std::lock_guard lock(mu_);
  return snapshot_;
}

Updater AsyncUpdater::finish() {
  queue_.close();
  if (worker_.joinable()) worker_.join();
  rethrow_if_failed();
  return std::move(updater_);
}

InstanceSet validation_set(const TrainConfig& cfg) {
  return generate_instances(cfg.n, static_cast<int>(cfg.val_size), cfg.seed + 1, cfg.family, cfg.scale);
}

double validate(const Model& model, const InstanceSet& set) {
  if (set.instances.empty()) throw ArgumentError("validate: empty instance set");
  double total = 0.0;
  for (const Instance& inst : set.instances) total += solve_greedy(model, inst).total_cost;
  return total / static_cast<double>(set.instances.size());
}

std::uint64_t epoch_seed(std::uint64_t seed, std::uint64_t epoch) noexcept { return mix_seed(seed, 2 + epoch); }

void write_metrics_header(std::ostream& out) {
  out << "epoch,reward,actor_loss,critic_loss,lr_actor,lr_critic,seconds\n";
}

void write_metrics_row(std::ostream& out, const EpochMetrics& m) {
  out << m.epoch << ',' << format_number(m.reward) << ',' << format_number(m.actor_loss) << ','
      << format_number(m.critic_loss) << ',' << format_number(m.lr_actor) << ',' << format_number(m.lr_critic) << ','
      << format_number(m.seconds) << '\n';
}

namespace {

struct BatchOutcome {
  std::vector<double> costs;
  std::vector<double> baselines;
  std::vector<double> log_probs;
  nn::ParameterSet actor_grads;
  nn::ParameterSet critic_grads;
};

BatchOutcome roll_out(const TrainConfig& cfg, const nn::ParameterSet& actor, const nn::ParameterSet& critic,
                      std::uint64_t epoch) {
  const ModelConfig& mc = cfg.model;
  const std::uint64_t es = epoch_seed(cfg.seed, epoch);
  const InstanceSet batch = generate_instances(cfg.n, static_cast<int>(cfg.batch), es, cfg.family, cfg.scale);
  BatchOutcome out;
  out.actor_grads = actor.zeros_like();
  out.critic_grads = critic.zeros_like();
  const double inv_b = 1.0 / static_cast<double>(cfg.batch);
  for (std::size_t i = 0; i < batch.instances.size(); ++i) {
    const Instance& inst = batch.instances[i];
    nn::Tape tape;
    SplitMix64 rng(mix_seed(es, 1 + i));
    EncoderOutput enc = encode(tape, inst, actor, mc.encoder, kActorEncoder);
    DecodeResult dec = decode_episode(tape, inst, actor, mc.decoder(), kActorDecoder, enc.e_static,
                                      DecodeMode::sample, rng);
    nn::Tape ctape;
    EncoderOutput cenc = encode(ctape, inst, critic, mc.encoder, kCriticEncoder);
    nn::Var b = nn::scale(critic_value(ctape, cenc.e_static, critic, mc.critic, kCriticHead), coordinate_scale(inst));

    const double cost = dec.trajectory.total_cost;
    const double baseline = ctape.value(b)[0];
    const double adv = cost - baseline;
    out.costs.push_back(cost);
    out.baselines.push_back(baseline);
    out.log_probs.push_back(tape.value(dec.log_prob_sum)[0]);

    tape.backward(dec.log_prob_sum, adv * inv_b);
    tape.collect(actor, out.actor_grads);
    ctape.backward(b, -2.0 * adv * inv_b);
    ctape.collect(critic, out.critic_grads);
  }
  return out;
}

Model assemble(const ModelConfig& cfg, const nn::ParameterSet& actor, const nn::ParameterSet& critic) {
  return Model{cfg, actor, critic};
}

std::string checkpoint_name(std::uint64_t epoch) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "epoch_%06llu.ckpt", static_cast<unsigned long long>(epoch));
  return buf;
}

}  // namespace

TrainResult train(const TrainConfig& cfg, std::ostream* log, const Model* init) {
  cfg.validate();
  TrainResult result;
  result.initial = init != nullptr ? *init : init_model(cfg.model, cfg.seed);
  if (init != nullptr) {
    if (!(init->config == cfg.model)) throw ArgumentError("train: initial model config differs from the training config");
    validate_shapes(*init);
  }
  const InstanceSet val = validation_set(cfg);

  std::ofstream metrics_file;
  std::ofstream manifest;
  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    metrics_file.open(cfg.out_dir / "metrics.csv");
    manifest.open(cfg.out_dir / "checkpoints.txt");
    if (!metrics_file || !manifest) throw IoError("cannot write into " + cfg.out_dir.string());
    write_metrics_header(metrics_file);
  }

  Updater actor_up(result.initial.actor, cfg.lr_actor, cfg.t_max(), cfg.optimizer, cfg.crash_actor_at);
  Updater critic_up(result.initial.critic, cfg.lr_critic, cfg.t_max(), cfg.optimizer);
  std::unique_ptr<AsyncUpdater> actor_async, critic_async;
  if (cfg.mode == TrainMode::async) {
    actor_async = std::make_unique<AsyncUpdater>(std::move(actor_up), cfg.queue_capacity);
    critic_async = std::make_unique<AsyncUpdater>(std::move(critic_up), cfg.queue_capacity);
  }

  auto current = [&]() -> Model {
    if (cfg.mode == TrainMode::async) {
      return assemble(cfg.model, *actor_async->snapshot(), *critic_async->snapshot());
    }
    return assemble(cfg.model, actor_up.params(), critic_up.params());
  };

  const auto start = std::chrono::steady_clock::now();
  try {
    for (std::uint64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
      std::shared_ptr<const nn::ParameterSet> actor_snap, critic_snap;
      const nn::ParameterSet* actor_params = &actor_up.params();
      const nn::ParameterSet* critic_params = &critic_up.params();
      if (cfg.mode == TrainMode::async) {
        actor_snap = actor_async->snapshot();
        critic_snap = critic_async->snapshot();
        actor_params = actor_snap.get();
        critic_params = critic_snap.get();
      }
      BatchOutcome batch = roll_out(cfg, *actor_params, *critic_params, epoch);
      const LossValues losses = compute_losses(batch.costs, batch.baselines, batch.log_probs);

      EpochMetrics m;
      m.epoch = epoch;
      double mean_cost = 0.0;
      for (double c : batch.costs) mean_cost += c;
      m.reward = -mean_cost / static_cast<double>(batch.costs.size());
      m.actor_loss = losses.actor;
      m.critic_loss = losses.critic;
      m.mean_abs_advantage = losses.mean_abs_advantage;
      m.dispatched = gate_open(losses.mean_abs_advantage, cfg.tau);

      if (cfg.mode == TrainMode::sync) {
        m.lr_actor = actor_up.current_lr();
        m.lr_critic = critic_up.current_lr();
        if (m.dispatched) {
          actor_up.apply(LossPacket{LossKind::actor, losses.actor, std::move(batch.actor_grads), epoch});
          critic_up.apply(LossPacket{LossKind::critic, losses.critic, std::move(batch.critic_grads), epoch});
        }
      } else {
        m.lr_actor = actor_async->current_lr();
        m.lr_critic = critic_async->current_lr();
      }
      if (cfg.mode == TrainMode::async && m.dispatched) {
        actor_async->submit(LossPacket{LossKind::actor, losses.actor, std::move(batch.actor_grads), epoch});
        critic_async->submit(LossPacket{LossKind::critic, losses.critic, std::move(batch.critic_grads), epoch});
      }
      m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

      const bool validate_now = (epoch + 1) % cfg.val_interval == 0 || epoch + 1 == cfg.epochs;
      if (validate_now && cfg.mode == TrainMode::async) {
        actor_async->drain();
        critic_async->drain();
      }
      result.metrics.push_back(m);
      if (metrics_file.is_open()) {
        write_metrics_row(metrics_file, m);
        metrics_file.flush();
      }

      if (validate_now) {
        Model model = current();
        const double v = validate(model, val);
        result.validations.push_back({epoch + 1, v});
        if (log != nullptr) {
          *log << "epoch " << epoch + 1 << " reward " << format_number(m.reward) << " validation " << format_number(v)
               << '\n';
        }
        if (v < result.best_validation) {
          result.best_validation = v;
          result.best = model;
          if (!cfg.out_dir.empty()) {
            const std::map<std::string, std::string> info{{"epoch", std::to_string(epoch + 1)},
                                                          {"validation", format_number(v)}};
            const std::string name = checkpoint_name(epoch + 1);
            save_model(cfg.out_dir / name, model, info);
            save_model(cfg.out_dir / "best.ckpt", model, info);
            manifest << "epoch " << epoch + 1 << " validation " << format_number(v) << " file " << name << '\n';
            manifest << "best " << name << '\n';
            manifest.flush();
          }
        }
      }
    }
  } catch (...) {
    if (!cfg.out_dir.empty()) {
      try {
        save_model(cfg.out_dir / "last.ckpt", current(), {{"status", "aborted"}});
      } catch (...) {
      }
    }
    throw;
  }

  if (cfg.mode == TrainMode::async) {
    actor_up = actor_async->finish();
    critic_up = critic_async->finish();
  }
  result.final_model = assemble(cfg.model, actor_up.params(), critic_up.params());
  result.lr_trace_actor = actor_up.lr_trace();
  result.lr_trace_critic = critic_up.lr_trace();
  result.actor_updates = actor_up.updates();
  result.critic_updates = critic_up.updates();
  result.skipped_updates = actor_up.skipped() + critic_up.skipped();
  if (!cfg.out_dir.empty()) save_model(cfg.out_dir / "last.ckpt", result.final_model, {{"status", "complete"}});
  return result;
}

}  // namespace tspd
