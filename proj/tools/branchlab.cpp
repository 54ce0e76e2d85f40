// Copyright 2026 The BranchLab Authors.
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


// branchlab command-line driver.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "branchlab/bnb.hpp"
#include "branchlab/datagen.hpp"
#include "branchlab/eval.hpp"
#include "branchlab/gcnn.hpp"
#include "branchlab/milp.hpp"
#include "branchlab/policies.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace branchlab;

namespace {

std::vector<MilpInstance> load_all(const fs::path& path) {
  std::vector<MilpInstance> out;
  for (const fs::path& file : list_instance_files(path)) out.push_back(load_instance(file));
  if (out.empty()) throw InvalidArgument("no instance files under " + path.string());
  return out;
}

ClockMode clock_from(const std::string& name) {
  if (name == "wall") return ClockMode::kWall;
  if (name == "virtual") return ClockMode::kVirtual;
  throw InvalidArgument("clock must be 'wall' or 'virtual'");
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

struct GenerateArgs {
  std::string family = "set_cover";
  int rows = 30, cols = 60, count = 1;
  double density = 0.15;
  std::uint64_t seed = 0;
  std::string out;
  bool mps = false;
};

void run_generate(const GenerateArgs& a) {
  const bool to_dir = a.count > 1 || fs::is_directory(a.out);
  if (to_dir) fs::create_directories(a.out);
  for (int k = 0; k < a.count; ++k) {
    GeneratorConfig g{family_from_string(a.family), a.rows, a.cols, a.density,
                      a.seed + static_cast<std::uint64_t>(k)};
    const MilpInstance inst = generate(g);
    const fs::path path =
        to_dir ? fs::path(a.out) / (inst.name() + (a.mps ? ".mps" : ".milp")) : fs::path(a.out);
    save_instance(inst, path);
    std::cout << path.string() << '\n';
  }
}

struct SolveArgs {
  std::string instance, policy = "pc", clock = "wall", log, trace;
  double time_limit = 900.0;
  std::uint64_t seed = 0;
  std::int64_t node_limit = 0;
};

void run_solve(const SolveArgs& a) {
  const MilpInstance inst = load_instance(a.instance);
  std::unique_ptr<BranchingController> controller = make_policy(a.policy)();
  std::ofstream trace;
  if (!a.trace.empty()) {
    trace = open_out(a.trace);
    if (auto* traced = dynamic_cast<TracedController*>(controller.get())) {
      traced->set_trace(&trace);
    }
  }
  EpisodeConfig ec;
  ec.time_limit = a.time_limit;
  ec.seed = a.seed;
  ec.clock = clock_from(a.clock);
  if (a.node_limit > 0) ec.node_limit = a.node_limit;
  const EpisodeResult res = run_episode(inst, ec, *controller);
  if (!a.log.empty()) {
    std::ofstream log = open_out(a.log);
    res.log.write_csv(log);
  }
  nlohmann::json j = nlohmann::json::parse(res.log.terminal_json());
  j["instance"] = inst.name();
  j["policy"] = a.policy;
  j["nodes"] = res.nodes;
  j["processed"] = res.processed;
  // Reported in the instance's own objective sense.
  j["dual_bound"] = inst.objective_sign() * res.terminal.dual_bound;
  j["incumbent"] = res.incumbent ? nlohmann::json(inst.objective_sign() * *res.incumbent)
                                 : nlohmann::json(nullptr);
  j["wall_seconds"] = res.wall_seconds;
  std::cout << j.dump(2) << '\n';
}

struct CollectArgs {
  std::string instances, out, clock = "virtual", trace;
  double time_limit = 60.0, p_sb = 1.0;
  std::uint64_t target = 1000, seed = 0;
  int max_passes = 10;
};

void run_collect(const CollectArgs& a) {
  const auto instances = load_all(a.instances);
  CollectionConfig cfg;
  cfg.time_limit = a.time_limit;
  cfg.p_sb = a.p_sb;
  cfg.target_samples = a.target;
  cfg.seed = a.seed;
  cfg.clock = clock_from(a.clock);
  cfg.max_passes = a.max_passes;
  std::ofstream trace;
  if (!a.trace.empty()) {
    trace = open_out(a.trace);
    cfg.trace = &trace;
  }
  const Dataset d = collect(instances, cfg);
  write_dataset(d, a.out);
  std::cout << "samples " << d.size() << " (train " << d.train.size() << ", valid "
            << d.valid.size() << "), node visits " << d.meta.node_visits
            << ", expert visits " << d.meta.expert_visits << '\n';
}

struct TrainArgs {
  std::string data, out, history;
  int dim = 8, batch = 64, epochs = 50;
  double lr = 1e-3;
  std::uint64_t seed = 0;
};

void run_train(const TrainArgs& a) {
  const Dataset d = read_dataset(a.data);
  TrainConfig cfg;
  cfg.h = a.dim;
  cfg.batch_size = a.batch;
  cfg.max_epochs = a.epochs;
  cfg.lr = a.lr;
  cfg.seed = a.seed;
  const TrainResult r = train(d, cfg);
  save_model(r.params, a.out);
  std::ostringstream csv;
  csv.precision(17);
  csv << "epoch,train_loss,valid_loss,lr,top1,top3,top5,top10\n";
  for (const EpochRecord& e : r.history) {
    csv << e.epoch << ',' << e.train_loss << ',' << e.valid_loss << ',' << e.lr;
    for (double v : e.valid_topk) csv << ',' << v;
    csv << '\n';
  }
  if (!a.history.empty()) open_out(a.history) << csv.str();
  const EpochRecord& best = r.history[r.best_epoch - 1];
  std::printf("best epoch %d: valid loss %.6f, top-1 %.2f%%, top-5 %.2f%%\n", r.best_epoch,
              best.valid_loss, best.valid_topk[0], best.valid_topk[2]);
}

void run_model_info(const std::string& file) {
  const GcnnParams p = load_model(file);
  nlohmann::json j;
  j["h"] = p.h;
  j["parameters"] = param_count({p.h});
  j["tensors"] = nlohmann::json::array();
  for (const TensorInfo& t : gcnn_layout(p.h)) {
    j["tensors"].push_back({{"name", t.name}, {"rows", t.rows}, {"cols", t.cols}});
  }
  j["prenorm"] = {{"cons_shift", p.prenorm.cons_shift}, {"cons_scale", p.prenorm.cons_scale},
                  {"edge_shift", p.prenorm.edge_shift}, {"edge_scale", p.prenorm.edge_scale},
                  {"var_shift", p.prenorm.var_shift},   {"var_scale", p.prenorm.var_scale}};
  std::cout << j.dump(2) << '\n';
}

struct EvaluateArgs {
  std::string instances, policy = "pc", opt_values, out, clock = "wall";
  double time_limit = 900.0, delay = 0.0;
  int seeds = 1;
  std::int64_t node_limit = 0;
};

void run_evaluate(const EvaluateArgs& a) {
  const auto instances = load_all(a.instances);
  EvalConfig cfg;
  cfg.policy = a.policy;
  cfg.time_limit = a.time_limit;
  cfg.seeds = a.seeds;
  cfg.clock = clock_from(a.clock);
  cfg.decision_delay = a.delay;
  if (a.node_limit > 0) cfg.node_limit = a.node_limit;
  if (!a.opt_values.empty()) {
    std::ifstream in(a.opt_values);
    if (!in) throw Error("cannot open " + a.opt_values);
    for (auto& [name, value] : nlohmann::json::parse(in).items()) {
      cfg.optimal_values[name] = value.get<double>();
    }
  }
  const EvalReport r = evaluate(instances, cfg);
  write_report(r, a.out);
  std::printf("%s: mean reward %.6g, shifted geomean time %.4g, mean nodes %.4g, errors %zu\n",
              r.policy.c_str(), r.mean_reward(), r.geomean_time(), r.mean_nodes(),
              r.errors.size());
}

void run_compare(const std::vector<std::string>& paths, const std::string& out) {
  std::vector<EvalReport> reports;
  for (const std::string& p : paths) reports.push_back(read_report(p));
  const std::string csv = comparison_csv(compare(reports));
  if (!out.empty()) open_out(out) << csv;
  std::cout << csv;
}

void run_scatter(const std::string& grid, const std::string& out) {
  const std::string csv = scatter_export(scatter_from_grid(grid));
  if (!out.empty()) open_out(out) << csv;
  std::cout << csv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"branchlab: learning-to-branch laboratory"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Generate synthetic MILP instances");
  g->add_option("--family", gen.family, "set_cover, multiknapsack or bin_pack_apportion")
      ->capture_default_str();
  g->add_option("--rows", gen.rows)->capture_default_str();
  g->add_option("--cols", gen.cols)->capture_default_str();
  g->add_option("--density", gen.density)->capture_default_str();
  g->add_option("--seed", gen.seed)->capture_default_str();
  g->add_option("--count", gen.count, "Instances with seeds seed..seed+count-1")
      ->capture_default_str();
  g->add_option("--out", gen.out, "Output file, or directory when count > 1")->required();
  g->add_flag("--mps", gen.mps, "Write MPS instead of the native format");

  SolveArgs sol;
  auto* s = app.add_subcommand("solve", "Run one branch-and-bound episode");
  s->add_option("--instance", sol.instance)->required();
  s->add_option("--policy", sol.policy, "fsb, pc, reliability, random or gcnn:<model>")
      ->capture_default_str();
  s->add_option("--time-limit", sol.time_limit)->capture_default_str();
  s->add_option("--seed", sol.seed)->capture_default_str();
  s->add_option("--clock", sol.clock, "wall or virtual")->capture_default_str();
  s->add_option("--node-limit", sol.node_limit);
  s->add_option("--log", sol.log, "Write the dual-bound event log (CSV)");
  s->add_option("--trace", sol.trace, "Write per-decision scores (JSON lines)");

  CollectArgs col;
  auto* c = app.add_subcommand("collect", "Collect strong-branching imitation samples");
  c->add_option("--instances", col.instances, "Instance file or directory")->required();
  c->add_option("--time-limit", col.time_limit, "Per-instance episode limit (s)")
      ->capture_default_str();
  c->add_option("--p-sb", col.p_sb)->capture_default_str();
  c->add_option("--target", col.target)->capture_default_str();
  c->add_option("--seed", col.seed)->capture_default_str();
  c->add_option("--clock", col.clock)->capture_default_str();
  c->add_option("--max-passes", col.max_passes)->capture_default_str();
  c->add_option("--trace", col.trace, "Write one JSON line per node visit");
  c->add_option("--out", col.out)->required();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train the GCNN policy");
  t->add_option("--data", tr.data)->required();
  t->add_option("--dim", tr.dim)->capture_default_str();
  t->add_option("--batch", tr.batch)->capture_default_str();
  t->add_option("--epochs", tr.epochs)->capture_default_str();
  t->add_option("--lr", tr.lr)->capture_default_str();
  t->add_option("--seed", tr.seed)->capture_default_str();
  t->add_option("--history", tr.history, "Write per-epoch history (CSV)");
  t->add_option("--out", tr.out)->required();

  std::string model_file;
  auto* mi = app.add_subcommand("model-info", "Describe a model file");
  mi->add_option("file", model_file)->required();

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Evaluate a policy over an instance set");
  e->add_option("--instances", ev.instances)->required();
  e->add_option("--policy", ev.policy)->capture_default_str();
  e->add_option("--time-limit", ev.time_limit)->capture_default_str();
  e->add_option("--seeds", ev.seeds)->capture_default_str();
  e->add_option("--opt-values", ev.opt_values, "JSON object mapping instance name to optimum");
  e->add_option("--clock", ev.clock)->capture_default_str();
  e->add_option("--delay", ev.delay, "Extra seconds charged per decision")
      ->capture_default_str();
  e->add_option("--node-limit", ev.node_limit);
  e->add_option("--out", ev.out, "Report directory")->required();

  std::vector<std::string> report_paths;
  std::string compare_out;
  auto* cmp = app.add_subcommand("compare", "Compare evaluation reports");
  cmp->add_option("reports", report_paths)->required();
  cmp->add_option("--out", compare_out, "Write the table as CSV");

  std::string grid, scatter_out;
  auto* sc = app.add_subcommand("scatter", "Export the experiment grid as CSV");
  sc->add_option("--grid", grid)->required();
  sc->add_option("--out", scatter_out);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*g) run_generate(gen);
    if (*s) run_solve(sol);
    if (*c) run_collect(col);
    if (*t) run_train(tr);
    if (*mi) run_model_info(model_file);
    if (*e) run_evaluate(ev);
    if (*cmp) run_compare(report_paths, compare_out);
    if (*sc) run_scatter(grid, scatter_out);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}
