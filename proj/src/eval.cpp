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


#include "branchlab/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>

#include "branchlab/dataset.hpp"
#include "branchlab/datagen.hpp"
#include "branchlab/gcnn.hpp"
#include "branchlab/policies.hpp"
#include "json.hpp"

namespace branchlab {

namespace fs = std::filesystem;
using nlohmann::json;

DualIntegral dual_integral(const EventLog& log, double horizon,
                           std::optional<double> opt) {
  const auto& ev = log.events();
  if (ev.empty()) throw InvalidArgument("dual integral of an empty event log");
  if (!(horizon >= ev.back().t)) {
    throw InvalidArgument("horizon ends before the last logged event");
  }
  for (std::size_t k = 0; k < ev.size(); ++k) {
    if (!std::isfinite(ev[k].z) || !std::isfinite(ev[k].t)) {
      throw InvalidArgument("event log holds a non-finite value");
    }
    if (k > 0 && (ev[k].t <= ev[k - 1].t || ev[k].z < ev[k - 1].z)) {
      throw InvalidArgument("event log times must increase and bounds must not decrease");
    }
  }
  DualIntegral out;
  double acc = ev.front().z * ev.front().t;
  for (std::size_t k = 0; k < ev.size(); ++k) {
    const double until = k + 1 < ev.size() ? ev[k + 1].t : horizon;
    acc += ev[k].z * (until - ev[k].t);
  }
  out.accumulated = acc;
  if (opt) out.integral_gap = horizon * *opt - acc;
  return out;
}

double shifted_geomean(const std::vector<double>& values, double shift) {
  if (values.empty()) throw InvalidArgument("geometric mean of no values");
  double logs = 0.0;
  for (double v : values) {
    if (!(v + shift > 0.0)) throw InvalidArgument("shifted value must be positive");
    logs += std::log(v + shift);
  }
  return std::exp(logs / static_cast<double>(values.size())) - shift;
}

int SlowedController::choose(Episode& episode, const Observation& observation) {
  episode.charge(seconds_);
  return inner_->choose(episode, observation);
}

ControllerFactory make_policy(const std::string& spec) {
  if (spec == "fsb") return [] { return std::make_unique<StrongBranchingController>(); };
  if (spec == "pc") return [] { return std::make_unique<PseudocostController>(); };
  if (spec == "reliability") return [] { return std::make_unique<ReliabilityController>(); };
  if (spec == "random") return [] { return std::make_unique<RandomController>(); };
  if (spec.rfind("gcnn:", 0) == 0) {
    auto params = std::make_shared<const GcnnParams>(load_model(spec.substr(5)));
    return [params] { return std::make_unique<GcnnController>(*params); };
  }
  throw InvalidArgument("unknown policy '" + spec +
                        "' (expected fsb, pc, reliability, random or gcnn:<model>)");
}

namespace {

double mean_of(const std::vector<EvalRow>& rows, double EvalRow::*field) {
  if (rows.empty()) return 0.0;
  double sum = 0.0;
  for (const EvalRow& r : rows) sum += r.*field;
  return sum / static_cast<double>(rows.size());
}

std::string safe_name(const std::string& name) {
  std::string out;
  for (char ch : name) {
    const bool ok = std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' ||
                    ch == '-' || ch == '.';
    out += ok ? ch : '_';
  }
  return out;
}

std::string log_file(const EvalRow& row) {
  return "logs/" + safe_name(row.instance) + "_s" + std::to_string(row.seed) + ".csv";
}

}  // namespace

double EvalReport::mean_reward() const { return mean_of(rows, &EvalRow::reward); }

double EvalReport::geomean_time() const {
  if (rows.empty()) return 0.0;
  std::vector<double> t;
  for (const EvalRow& r : rows) t.push_back(r.solve_time);
  return shifted_geomean(t);
}

double EvalReport::mean_nodes() const {
  if (rows.empty()) return 0.0;
  double sum = 0.0;
  for (const EvalRow& r : rows) sum += static_cast<double>(r.nodes);
  return sum / static_cast<double>(rows.size());
}

EvalReport evaluate(const std::vector<MilpInstance>& instances,
                    const EvalConfig& config, const ControllerFactory& factory) {
  if (config.seeds < 1) throw InvalidArgument("seeds must be at least 1");
  if (!(config.time_limit >= 0.0)) throw InvalidArgument("time_limit must be non-negative");
  EvalReport report;
  report.policy = config.policy;
  report.time_limit = config.time_limit;
  report.clock = config.clock == ClockMode::kVirtual ? "virtual" : "wall";
  report.seeds = config.seeds;

  const std::size_t total = instances.size() * static_cast<std::size_t>(config.seeds);
  std::vector<std::optional<EvalRow>> rows(total);
  std::vector<std::optional<EvalError>> errors(total);
  const auto count = static_cast<std::ptrdiff_t>(total);
#pragma omp parallel for schedule(dynamic) if (config.mode == ExecMode::kParallel)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    const MilpInstance& instance = instances[k / config.seeds];
    const int seed = static_cast<int>(k % config.seeds);
    try {
      std::unique_ptr<BranchingController> controller = factory();
      if (config.decision_delay > 0.0) {
        controller = std::make_unique<SlowedController>(std::move(controller),
                                                        config.decision_delay);
      }
      EpisodeConfig ec;
      ec.time_limit = config.time_limit;
      ec.clock = config.clock;
      ec.seconds_per_node = config.seconds_per_node;
      ec.node_limit = config.node_limit;
      ec.seed = static_cast<std::uint64_t>(seed);
      EpisodeResult res = run_episode(instance, ec, *controller);
      EvalRow row;
      row.instance = instance.name();
      row.seed = seed;
      row.nodes = res.nodes;
      row.reason = to_string(res.terminal.reason);
      row.solved = res.terminal.reason == TerminalReason::kSolved ||
                   res.terminal.reason == TerminalReason::kInfeasible;
      row.solve_time = row.solved ? res.terminal.elapsed : config.time_limit;
      std::optional<double> opt;
      if (auto it = config.optimal_values.find(row.instance);
          it != config.optimal_values.end()) {
        opt = it->second;
      }
      const DualIntegral di = dual_integral(res.log, config.time_limit, opt);
      row.reward = di.accumulated;
      row.integral_gap = di.integral_gap;
      row.log = std::move(res.log);
      rows[k] = std::move(row);
    } catch (const std::exception& e) {
      errors[k] = EvalError{instance.name(), seed, e.what()};
    }
  }
  for (std::size_t k = 0; k < total; ++k) {
    if (rows[k]) report.rows.push_back(std::move(*rows[k]));
    if (errors[k]) report.errors.push_back(std::move(*errors[k]));
  }
  return report;
}

EvalReport evaluate(const std::vector<MilpInstance>& instances,
                    const EvalConfig& config) {
  return evaluate(instances, config, make_policy(config.policy));
}

void write_report(const EvalReport& report, const fs::path& dir) {
  fs::create_directories(dir / "logs");
  json j;
  j["policy"] = report.policy;
  j["time_limit"] = report.time_limit;
  j["clock"] = report.clock;
  j["seeds"] = report.seeds;
  j["mean_reward"] = report.mean_reward();
  j["geomean_time"] = report.geomean_time();
  j["mean_nodes"] = report.mean_nodes();
  j["rows"] = json::array();
  std::ostringstream csv;
  csv.precision(17);
  csv << "instance,seed,reward,integral_gap,nodes,solve_time,reason\n";
  for (const EvalRow& r : report.rows) {
    json row;
    row["instance"] = r.instance;
    row["seed"] = r.seed;
    row["reward"] = r.reward;
    row["integral_gap"] = r.integral_gap ? json(*r.integral_gap) : json(nullptr);
    row["nodes"] = r.nodes;
    row["solve_time"] = r.solve_time;
    row["reason"] = r.reason;
    row["solved"] = r.solved;
    row["log"] = log_file(r);
    j["rows"].push_back(row);
    csv << r.instance << ',' << r.seed << ',' << r.reward << ',';
    if (r.integral_gap) csv << *r.integral_gap;
    csv << ',' << r.nodes << ',' << r.solve_time << ',' << r.reason << '\n';
    std::ofstream log(dir / log_file(r));
    r.log.write_csv(log);
    if (!log) throw Error("cannot write " + (dir / log_file(r)).string());
  }
  j["errors"] = json::array();
  for (const EvalError& e : report.errors) {
    j["errors"].push_back({{"instance", e.instance}, {"seed", e.seed}, {"message", e.message}});
  }
  std::ofstream out(dir / "report.json");
  out << j.dump(2) << '\n';
  std::ofstream rows(dir / "rows.csv");
  rows << csv.str();
  if (!out || !rows) throw Error("cannot write report in " + dir.string());
}

EvalReport read_report(const fs::path& path) {
  const fs::path file = fs::is_directory(path) ? path / "report.json" : path;
  const fs::path dir = file.parent_path();
  std::ifstream in(file);
  if (!in) throw Error("cannot open " + file.string());
  json j;
  try {
    j = json::parse(in);
    EvalReport report;
    report.policy = j.at("policy").get<std::string>();
    report.time_limit = j.at("time_limit").get<double>();
    report.clock = j.at("clock").get<std::string>();
    report.seeds = j.at("seeds").get<int>();
    for (const json& row : j.at("rows")) {
      EvalRow r;
      r.instance = row.at("instance").get<std::string>();
      r.seed = row.at("seed").get<int>();
      r.reward = row.at("reward").get<double>();
      if (!row.at("integral_gap").is_null()) r.integral_gap = row["integral_gap"].get<double>();
      r.nodes = row.at("nodes").get<std::int64_t>();
      r.solve_time = row.at("solve_time").get<double>();
      r.reason = row.at("reason").get<std::string>();
      r.solved = row.at("solved").get<bool>();
      std::ifstream log(dir / row.at("log").get<std::string>());
      if (log) r.log = EventLog::read_csv(log);
      report.rows.push_back(std::move(r));
    }
    for (const json& e : j.at("errors")) {
      report.errors.push_back({e.at("instance").get<std::string>(), e.at("seed").get<int>(),
                               e.at("message").get<std::string>()});
    }
    return report;
  } catch (const json::exception& e) {
    throw FormatError("malformed report " + file.string() + ": " + e.what());
  }
}

std::vector<ComparisonRow> compare(const std::vector<EvalReport>& reports) {
  using Key = std::pair<std::string, int>;
  auto grid_of = [](const EvalReport& r) {
    std::set<Key> keys;
    for (const EvalRow& row : r.rows) keys.insert({row.instance, row.seed});
    for (const EvalError& e : r.errors) keys.insert({e.instance, e.seed});
    return keys;
  };
  if (reports.empty()) return {};
  const std::set<Key> grid = grid_of(reports.front());
  for (const EvalReport& r : reports) {
    if (grid_of(r) != grid) throw InvalidArgument("reports cover different (instance, seed) grids");
  }
  std::vector<std::map<Key, const EvalRow*>> index(reports.size());
  for (std::size_t p = 0; p < reports.size(); ++p) {
    for (const EvalRow& row : reports[p].rows) index[p][{row.instance, row.seed}] = &row;
  }
  std::vector<ComparisonRow> out(reports.size());
  std::vector<double> node_sum(reports.size(), 0.0);
  int common = 0;
  for (const Key& key : grid) {
    bool all_solved = true;
    double fastest = kInf;
    int fastest_count = 0;
    std::size_t winner = 0;
    for (std::size_t p = 0; p < reports.size(); ++p) {
      auto it = index[p].find(key);
      const EvalRow* row = it == index[p].end() ? nullptr : it->second;
      if (row == nullptr || !row->solved) {
        all_solved = false;
        continue;
      }
      ++out[p].solved;
      if (row->solve_time < fastest) {
        fastest = row->solve_time;
        fastest_count = 1;
        winner = p;
      } else if (row->solve_time == fastest) {
        ++fastest_count;
      }
    }
    if (fastest_count == 1) ++out[winner].wins;
    if (all_solved) {
      ++common;
      for (std::size_t p = 0; p < reports.size(); ++p) {
        node_sum[p] += static_cast<double>(index[p].at(key)->nodes);
      }
    }
  }
  for (std::size_t p = 0; p < reports.size(); ++p) {
    out[p].policy = reports[p].policy;
    out[p].mean_reward = reports[p].mean_reward();
    out[p].geomean_time = reports[p].geomean_time();
    if (common > 0) out[p].nodes = node_sum[p] / common;
  }
  return out;
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  std::ostringstream out;
  out.precision(17);
  out << "policy,mean_reward,geomean_time,nodes,wins,solved\n";
  for (const ComparisonRow& r : rows) {
    out << r.policy << ',' << r.mean_reward << ',' << r.geomean_time << ',';
    if (r.nodes) out << *r.nodes;
    out << ',' << r.wins << ',' << r.solved << '\n';
  }
  return out.str();
}

std::string scatter_export(const std::vector<ScatterRow>& rows) {
  std::ostringstream out;
  out.precision(17);
  out << "time_limit,p_sb,samples,top1,top3,top5,top10,reward\n";
  for (const ScatterRow& r : rows) {
    out << r.time_limit << ',' << r.p_sb << ',' << r.samples << ',' << r.top1
        << ',' << r.top3 << ',' << r.top5 << ',' << r.top10 << ',' << r.reward
        << '\n';
  }
  return out.str();
}

std::vector<ScatterRow> scatter_from_grid(const fs::path& grid) {
  if (!fs::is_directory(grid)) throw InvalidArgument("grid is not a directory: " + grid.string());
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(grid)) {
    if (entry.is_directory() && fs::exists(entry.path() / "experiment.json")) {
      dirs.push_back(entry.path());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  std::vector<ScatterRow> rows;
  for (const fs::path& dir : dirs) {
    std::ifstream in(dir / "experiment.json");
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw FormatError("malformed " + (dir / "experiment.json").string() + ": " + e.what());
    }
    const Dataset data = read_dataset(dir / j.at("dataset").get<std::string>());
    const GcnnParams params = load_model(dir / j.at("model").get<std::string>());
    const EvalReport report = read_report(dir / j.at("report").get<std::string>());
    const auto& held_out = data.valid.empty() ? data.train : data.valid;
    const auto topk = top_k_accuracy(params, held_out, {1, 3, 5, 10});
    ScatterRow row;
    row.time_limit = data.meta.time_limit;
    row.p_sb = data.meta.p_sb;
    row.samples = data.size();
    row.top1 = topk[0];
    row.top3 = topk[1];
    row.top5 = topk[2];
    row.top10 = topk[3];
    row.reward = report.mean_reward();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace branchlab
