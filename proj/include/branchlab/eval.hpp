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


// Policy evaluation: dual integrals, per-episode reports, policy comparison
// and plot-ready exports.

#ifndef BRANCHLAB_EVAL_HPP_
#define BRANCHLAB_EVAL_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "branchlab/bnb.hpp"
#include "branchlab/milp.hpp"

namespace branchlab {

struct DualIntegral {
  // horizon * opt - accumulated, when opt is known.
  std::optional<double> integral_gap;
  // Integral of the piecewise-constant bound z(t) over [0, horizon]; z is the
  // first event's value before that event.
  double accumulated = 0.0;
};

// Throws InvalidArgument on an empty log, a horizon before the last event or
// a non-finite bound.
DualIntegral dual_integral(const EventLog& log, double horizon,
                           std::optional<double> opt = std::nullopt);

// exp(mean(log(v + shift))) - shift.
double shifted_geomean(const std::vector<double>& values, double shift = 1.0);

using ControllerFactory = std::function<std::unique_ptr<BranchingController>()>;

// "fsb", "pc", "reliability", "random" or "gcnn:<model file>". A model file
// is loaded once and shared by every controller the factory makes.
ControllerFactory make_policy(const std::string& spec);

// Charges `seconds` to the episode clock on every decision of `inner`.
class SlowedController : public BranchingController {
 public:
  SlowedController(std::unique_ptr<BranchingController> inner, double seconds)
      : inner_(std::move(inner)), seconds_(seconds) {}
  std::string name() const override { return inner_->name(); }
  bool needs_state() const override { return inner_->needs_state(); }
  void begin_episode(const Episode& episode) override { inner_->begin_episode(episode); }
  int choose(Episode& episode, const Observation& observation) override;
  void observe(const Episode& episode) override { inner_->observe(episode); }

 private:
  std::unique_ptr<BranchingController> inner_;
  double seconds_;
};

struct EvalConfig {
  std::string policy = "pc";
  double time_limit = 900.0;
  int seeds = 1;
  ClockMode clock = ClockMode::kWall;
  double seconds_per_node = 0.01;
  std::optional<std::int64_t> node_limit;
  // Seconds charged per branching decision on top of the policy's own cost.
  double decision_delay = 0.0;
  // Optimal values by instance name.
  std::map<std::string, double> optimal_values;
  ExecMode mode = ExecMode::kParallel;
};

struct EvalRow {
  std::string instance;
  int seed = 0;
  double reward = 0.0;
  std::optional<double> integral_gap;
  std::int64_t nodes = 0;
  // Elapsed episode time when solved, otherwise the time limit.
  double solve_time = 0.0;
  std::string reason;
  bool solved = false;
  EventLog log;
};

struct EvalError {
  std::string instance;
  int seed = 0;
  std::string message;
};

struct EvalReport {
  std::string policy;
  double time_limit = 0.0;
  std::string clock;  // "wall" or "virtual"
  int seeds = 1;
  std::vector<EvalRow> rows;  // ordered by instance, then seed
  std::vector<EvalError> errors;

  double mean_reward() const;
  double geomean_time() const;
  double mean_nodes() const;
};

// Runs every (instance, seed) episode; seed s uses EpisodeConfig::seed = s.
// Failures are collected in `errors`.
EvalReport evaluate(const std::vector<MilpInstance>& instances,
                    const EvalConfig& config,
                    const ControllerFactory& factory);
EvalReport evaluate(const std::vector<MilpInstance>& instances,
                    const EvalConfig& config);

// Directory layout: report.json (aggregates and rows), rows.csv and
// logs/<instance>_s<seed>.csv.
void write_report(const EvalReport& report, const std::filesystem::path& dir);
// Accepts the directory or its report.json.
EvalReport read_report(const std::filesystem::path& path);

struct ComparisonRow {
  std::string policy;
  double mean_reward = 0.0;
  double geomean_time = 0.0;
  // Mean final node count over the (instance, seed) pairs every policy solved.
  std::optional<double> nodes;
  int wins = 0;
  int solved = 0;
};

// Wins go to the strictly fastest solver of each pair; ties award no win.
// Throws InvalidArgument when the reports cover different grids.
std::vector<ComparisonRow> compare(const std::vector<EvalReport>& reports);
std::string comparison_csv(const std::vector<ComparisonRow>& rows);

struct ScatterRow {
  double time_limit = 0.0;
  double p_sb = 0.0;
  std::uint64_t samples = 0;
  double top1 = 0.0, top3 = 0.0, top5 = 0.0, top10 = 0.0;
  double reward = 0.0;
};

std::string scatter_export(const std::vector<ScatterRow>& rows);
// Every subdirectory of `grid` holding an experiment.json with "dataset",
// "model" and "report" paths (relative to that subdirectory) gives one row:
// collection settings from the dataset header, top-k of the model on the
// dataset's validation split (train split when empty), reward from the
// report. Rows follow subdirectory name order.
std::vector<ScatterRow> scatter_from_grid(const std::filesystem::path& grid);

}  // namespace branchlab

#endif  // BRANCHLAB_EVAL_HPP_
