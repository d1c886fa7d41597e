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

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include "tspd/error.hpp"
#include "tspd/evaluation.hpp"
#include "tspd/instances.hpp"
#include "tspd/model.hpp"
#include "tspd/oracle.hpp"
#include "tspd/render.hpp"
#include "tspd/training.hpp"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

struct GenerateArgs {
  int n = 20;
  int count = 100;
  std::uint64_t seed = 0;
  std::string family = "corner";
  double scale = 100.0;
  std::string out;
};

struct TrainArgs {
  int n = 10;
  std::size_t epochs = 10000;
  std::size_t batch = 64;
  std::uint64_t seed = 0;
  std::string mode = "sync";
  std::string out;
  double tau = 0.5;
  double lr_actor = 1e-4;
  double lr_critic = 1e-4;
  std::size_t val_interval = 200;
  std::size_t val_size = 100;
  std::size_t hidden = 128;
  std::size_t heads = 8;
  std::size_t layers = 3;
  std::size_t ff = 512;
  std::string family = "corner";
  double scale = 100.0;
};

struct EvalArgs {
  std::string ckpt;
  std::string instances;
  std::string strategy = "greedy";
  std::size_t k = 1;
  std::uint64_t seed = 0;
  std::string baseline;
  std::string report;
  bool parallel = false;
};

struct OracleArgs {
  std::string instance;
  std::string instances;
  std::string baselines_out;
};

struct SolveArgs {
  std::string ckpt;
  std::string instance;
  std::string render;
  std::string strategy = "greedy";
  std::size_t k = 1;
  std::uint64_t seed = 0;
};

void print_plan(std::ostream& out, const tspd::Plan& plan) {
  out << "cost " << tspd::format_number(plan.cost) << '\n';
  for (const tspd::Operation& op : plan.operations()) out << tspd::to_string(op.agent) << ' ' << op.target << '\n';
}

int run_generate(const GenerateArgs& a) {
  const tspd::InstanceSet set = tspd::generate_instances(a.n, a.count, a.seed, tspd::parse_family(a.family), a.scale);
  tspd::save_instances(set, a.out);
  std::cout << "wrote " << set.instances.size() << " instances to " << a.out << '\n';
  return kOk;
}

int run_train(const TrainArgs& a) {
  tspd::TrainConfig cfg;
  cfg.n = a.n;
  cfg.epochs = a.epochs;
  cfg.batch = a.batch;
  cfg.seed = a.seed;
  cfg.mode = tspd::parse_train_mode(a.mode);
  cfg.out_dir = a.out;
  cfg.tau = a.tau;
  cfg.lr_actor = a.lr_actor;
  cfg.lr_critic = a.lr_critic;
  cfg.val_interval = a.val_interval;
  cfg.val_size = a.val_size;
  cfg.model = tspd::ModelConfig::with_hidden(a.hidden, a.heads, a.layers, a.ff);
  cfg.family = tspd::parse_family(a.family);
  cfg.scale = a.scale;
  const tspd::TrainResult r = tspd::train(cfg, &std::cout);
  std::cout << "best validation " << tspd::format_number(r.best_validation) << '\n';
  std::cout << "updates actor " << r.actor_updates << " critic " << r.critic_updates << " skipped "
            << r.skipped_updates << '\n';
  return kOk;
}

int run_eval(const EvalArgs& a) {
  const tspd::Model model = tspd::load_model(a.ckpt);
  const tspd::InstanceSet set = tspd::load_instances(a.instances);
  tspd::EvalOptions opts;
  opts.strategy = tspd::parse_strategy(a.strategy);
  opts.k = a.k;
  opts.seed = a.seed;
  opts.threads = a.parallel ? tspd::thread_cap(std::thread::hardware_concurrency()) : 1;
  if (!a.baseline.empty()) opts.baseline = tspd::read_baselines(a.baseline);
  const tspd::EvalReport report = tspd::evaluate(model, set, opts);
  tspd::write_report_table(std::cout, report);
  if (!a.report.empty()) {
    std::ofstream out(a.report);
    if (!out) throw tspd::IoError("cannot write report " + a.report);
    tspd::write_report_csv(out, report);
  }
  return kOk;
}

int run_oracle(const OracleArgs& a) {
  if (a.instance.empty() == a.instances.empty()) {
    throw tspd::ArgumentError("oracle: give exactly one of --instance or --instances");
  }
  if (!a.instance.empty()) {
    const tspd::Instance inst = tspd::load_instance(a.instance);
    print_plan(std::cout, tspd::exact_optimum(inst));
    return kOk;
  }
  const tspd::InstanceSet set = tspd::load_instances(a.instances);
  std::vector<double> costs;
  for (std::size_t i = 0; i < set.instances.size(); ++i) {
    const double c = tspd::exact_optimum(set.instances[i]).cost;
    costs.push_back(c);
    std::cout << i << ' ' << tspd::format_number(c) << '\n';
  }
  if (!a.baselines_out.empty()) tspd::write_baselines(a.baselines_out, costs);
  return kOk;
}

int run_solve(const SolveArgs& a) {
  const tspd::Model model = tspd::load_model(a.ckpt);
  const tspd::Instance inst = tspd::load_instance(a.instance);
  const tspd::Trajectory traj = tspd::parse_strategy(a.strategy) == tspd::Strategy::greedy
                                    ? tspd::solve_greedy(model, inst)
                                    : tspd::best_of_k(model, inst, a.k, a.seed);
  tspd::write_trajectory(std::cout, traj, inst);
  if (!a.render.empty()) tspd::render_route(traj, inst, a.render);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TSP with drone: instance tools, exact oracle, training and evaluation"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Generate an instance set");
  g->add_option("--n", gen.n, "Nodes per instance, depot included")->capture_default_str();
  g->add_option("--count", gen.count, "Number of instances")->capture_default_str();
  g->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
  g->add_option("--family", gen.family, "corner or uniform")->capture_default_str();
  g->add_option("--scale", gen.scale, "Coordinate range, 1 or 100")->capture_default_str();
  g->add_option("--out", gen.out, "Output directory")->required();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train actor and critic");
  t->add_option("--n", tr.n, "Nodes per instance")->capture_default_str();
  t->add_option("--epochs", tr.epochs, "Training epochs")->capture_default_str();
  t->add_option("--batch", tr.batch, "Instances per epoch")->capture_default_str();
  t->add_option("--seed", tr.seed, "Seed")->capture_default_str();
  t->add_option("--mode", tr.mode, "sync or async")->capture_default_str();
  t->add_option("--out", tr.out, "Output directory")->required();
  t->add_option("--tau", tr.tau, "Advantage gate threshold")->capture_default_str();
  t->add_option("--lr-actor", tr.lr_actor, "Peak actor learning rate")->capture_default_str();
  t->add_option("--lr-critic", tr.lr_critic, "Peak critic learning rate")->capture_default_str();
  t->add_option("--val-interval", tr.val_interval, "Epochs between validations")->capture_default_str();
  t->add_option("--val-size", tr.val_size, "Validation instances")->capture_default_str();
  t->add_option("--hidden", tr.hidden, "Hidden size")->capture_default_str();
  t->add_option("--heads", tr.heads, "Attention heads")->capture_default_str();
  t->add_option("--layers", tr.layers, "Encoder layers")->capture_default_str();
  t->add_option("--ff", tr.ff, "Feed-forward width")->capture_default_str();
  t->add_option("--family", tr.family, "corner or uniform")->capture_default_str();
  t->add_option("--scale", tr.scale, "Coordinate range, 1 or 100")->capture_default_str();

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate a checkpoint on an instance set");
  e->add_option("--ckpt", ev.ckpt, "Checkpoint file")->required();
  e->add_option("--instances", ev.instances, "Instance directory")->required();
  e->add_option("--strategy", ev.strategy, "greedy or sample")->capture_default_str();
  e->add_option("--k", ev.k, "Samples per instance")->capture_default_str();
  e->add_option("--seed", ev.seed, "Sampling seed")->capture_default_str();
  e->add_option("--baseline", ev.baseline, "Baseline cost file, one cost per line");
  e->add_option("--report", ev.report, "CSV report path");
  e->add_flag("--parallel", ev.parallel, "Solve instances in parallel (TSPD_THREADS caps workers)");

  OracleArgs orc;
  auto* o = app.add_subcommand("oracle", "Exact optimum for small instances");
  o->add_option("--instance", orc.instance, "Instance file");
  o->add_option("--instances", orc.instances, "Instance directory");
  o->add_option("--baselines-out", orc.baselines_out, "Write per-instance optimal costs here");

  SolveArgs sv;
  auto* s = app.add_subcommand("solve", "Solve one instance with a checkpoint");
  s->add_option("--ckpt", sv.ckpt, "Checkpoint file")->required();
  s->add_option("--instance", sv.instance, "Instance file")->required();
  s->add_option("--render", sv.render, "Write an SVG drawing of the route");
  s->add_option("--strategy", sv.strategy, "greedy or sample")->capture_default_str();
  s->add_option("--k", sv.k, "Samples when sampling")->capture_default_str();
  s->add_option("--seed", sv.seed, "Sampling seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*g) return run_generate(gen);
    if (*t) return run_train(tr);
    if (*e) return run_eval(ev);
    if (*o) return run_oracle(orc);
    if (*s) return run_solve(sv);
  } catch (const tspd::ArgumentError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kUsage;
  } catch (const tspd::NumericError& err) {
    std::cerr << "numeric error: " << err.what() << '\n';
    return kNumeric;
  } catch (const tspd::Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kData;
  } catch (const std::filesystem::filesystem_error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kData;
  }
  return kUsage;
}
