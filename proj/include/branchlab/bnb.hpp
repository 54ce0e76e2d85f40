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


// Branch-and-bound episode. The engine owns the tree; a controller picks the
// branching variable at every focus node. Node selection is best-bound with
// ties broken by the lower node id, and both children are solved as soon as
// they are created.

#ifndef BRANCHLAB_BNB_HPP_
#define BRANCHLAB_BNB_HPP_

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "branchlab/features.hpp"
#include "branchlab/milp.hpp"
#include "branchlab/simplex.hpp"

namespace branchlab {

inline constexpr double kPruneTol = 1e-9;

enum class NodeStatus {
  kOpen,
  kBranched,
  kPrunedInfeasible,
  kPrunedBound,
  kIntegral,
};

std::string to_string(NodeStatus status);

struct BoundChange {
  int var = 0;
  BoundSide side = BoundSide::kLower;
  double value = 0.0;
};

struct BnbNode {
  int id = 0;
  int parent_id = -1;
  int depth = 0;
  std::vector<BoundChange> changes;  // full path from the root
  LpSolution lp;
  double lower_bound = -kInf;
  NodeStatus status = NodeStatus::kOpen;
  bool processed = false;
  // LP hit the iteration cap; pruned, but its bound stays in the dual bound.
  bool lp_failed = false;
  int branch_var = -1;
  std::pair<int, int> children{-1, -1};
};

enum class ClockMode {
  kWall,     // monotonic wall clock; controller think time counts
  kVirtual,  // each processed node advances seconds_per_node
};

struct EpisodeConfig {
  double time_limit = 900.0;
  std::optional<std::int64_t> node_limit;
  std::uint64_t seed = 0;
  ClockMode clock = ClockMode::kWall;
  double seconds_per_node = 0.01;
  // Build the bipartite state for every Observation.
  bool compute_state = true;
  SimplexOptions lp;
};

enum class TerminalReason {
  kSolved,
  kInfeasible,
  kTimeLimit,
  kNodeLimit,
  kNumericalFailure,
};

std::string to_string(TerminalReason reason);

struct Terminal {
  TerminalReason reason = TerminalReason::kSolved;
  double dual_bound = kInf;
  double elapsed = 0.0;
};

struct Observation {
  BipartiteState state;  // empty unless EpisodeConfig::compute_state
  std::vector<int> candidates;
  int focus_node_id = 0;
  double dual_bound = 0.0;
  double elapsed = 0.0;
};

using StepResult = std::variant<Observation, Terminal>;

// Dual-bound trajectory: strictly increasing t, nondecreasing z.
class EventLog {
 public:
  struct Event {
    double t = 0.0;
    double z = 0.0;
    bool operator==(const Event&) const = default;
  };

  // Equal or earlier t replaces the last entry.
  void record(double t, double z);
  void finish(double t_end, TerminalReason reason);

  const std::vector<Event>& events() const { return events_; }
  bool finished() const { return terminal_.has_value(); }
  double t_end() const;
  TerminalReason reason() const;

  void write_csv(std::ostream& out) const;
  std::string terminal_json() const;
  static EventLog read_csv(std::istream& in);

  bool operator==(const EventLog&) const = default;

 private:
  std::vector<Event> events_;
  std::optional<std::pair<double, TerminalReason>> terminal_;
};

// Pseudocost feedback from the last step.
struct BranchingRecord {
  int node_id = -1;
  int var = -1;
  double parent_value = 0.0;  // LP value of var at the parent
  double parent_bound = 0.0;
  // Child LP objective, or nullopt when the child was infeasible, failed or
  // not processed.
  std::optional<double> down_objective;
  std::optional<double> up_objective;
};

class Episode {
 public:
  // `instance` must outlive the episode.
  Episode(const MilpInstance& instance, EpisodeConfig config);

  StepResult reset();
  // Throws InvalidArgument if `action` is not a candidate of the focus node;
  // the episode is left unchanged.
  StepResult step(int action);

  // Observation of the current focus node (the one the last StepResult held).
  const Observation& observation() const;
  bool done() const { return terminal_.has_value(); }
  const std::optional<Terminal>& terminal() const { return terminal_; }

  const MilpInstance& instance() const { return instance_; }
  const EpisodeConfig& config() const { return config_; }
  const std::vector<BnbNode>& nodes() const { return nodes_; }
  const BnbNode& node(int id) const { return nodes_[id]; }
  const BnbNode& focus() const { return nodes_[focus_]; }
  VarBounds local_bounds(int node_id) const;
  const VarBounds& focus_bounds() const { return focus_bounds_; }
  const EventLog& event_log() const { return log_; }
  const TreeStats& stats() const { return stats_; }
  const std::optional<BranchingRecord>& last_branching() const {
    return last_branching_;
  }
  std::optional<double> incumbent_value() const { return incumbent_value_; }
  const std::vector<double>& incumbent() const { return incumbent_; }
  std::vector<int> open_nodes() const;
  std::int64_t processed_nodes() const { return processed_; }
  std::int64_t failed_nodes() const { return failed_; }

  double dual_bound() const;
  double elapsed() const;
  // Adds think time. Under the wall clock it is added on top of real time.
  void charge(double seconds) { charged_ += seconds; }

 private:
  void process(int id, const LpSolution& lp);
  void prune_by_incumbent();
  StepResult advance();
  std::optional<Terminal> check_limits();
  StepResult terminate(TerminalReason reason);
  Observation make_observation(int id);
  void log_bound();

  const MilpInstance& instance_;
  EpisodeConfig config_;
  std::vector<BnbNode> nodes_;
  std::set<std::pair<double, int>> open_;
  std::vector<double> failed_bounds_;
  VarBounds focus_bounds_;
  int focus_ = 0;
  std::optional<Observation> observation_;
  std::optional<Terminal> terminal_;
  EventLog log_;
  TreeStats stats_;
  std::optional<BranchingRecord> last_branching_;
  std::optional<double> incumbent_value_;
  std::vector<double> incumbent_;
  std::int64_t processed_ = 0;
  std::int64_t failed_ = 0;
  std::chrono::steady_clock::time_point start_;
  double virtual_time_ = 0.0;
  double charged_ = 0.0;
};

// Branching candidates: integer variables whose value has a fractional part in
// (kIntegralityTol, 1 - kIntegralityTol), ascending.
std::vector<int> candidates(const MilpInstance& instance,
                            std::span<const double> x);

class BranchingController {
 public:
  virtual ~BranchingController() = default;
  virtual std::string name() const = 0;
  // Whether Observations must carry the bipartite state.
  virtual bool needs_state() const { return false; }
  virtual void begin_episode(const Episode& episode) { (void)episode; }
  virtual int choose(Episode& episode, const Observation& observation) = 0;
  // Called after every successful step.
  virtual void observe(const Episode& episode) { (void)episode; }
};

struct EpisodeResult {
  Terminal terminal;
  EventLog log;
  std::int64_t nodes = 0;  // nodes created, root included
  std::int64_t processed = 0;
  std::optional<double> incumbent;
  double wall_seconds = 0.0;
};

EpisodeResult run_episode(const MilpInstance& instance, EpisodeConfig config,
                          BranchingController& controller);

}  // namespace branchlab

#endif  // BRANCHLAB_BNB_HPP_
