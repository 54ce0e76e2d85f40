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


#include "branchlab/bnb.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace branchlab {

std::string to_string(NodeStatus status) {
  switch (status) {
    case NodeStatus::kOpen:
      return "open";
    case NodeStatus::kBranched:
      return "branched";
    case NodeStatus::kPrunedInfeasible:
      return "pruned_infeasible";
    case NodeStatus::kPrunedBound:
      return "pruned_bound";
    case NodeStatus::kIntegral:
      return "integral";
  }
  return "unknown";
}

std::string to_string(TerminalReason reason) {
  switch (reason) {
    case TerminalReason::kSolved:
      return "solved";
    case TerminalReason::kInfeasible:
      return "infeasible";
    case TerminalReason::kTimeLimit:
      return "time_limit";
    case TerminalReason::kNodeLimit:
      return "node_limit";
    case TerminalReason::kNumericalFailure:
      return "numerical_failure";
  }
  return "unknown";
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// EventLog

void EventLog::record(double t, double z) {
  if (!events_.empty() && t <= events_.back().t) {
    events_.back().z = std::max(events_.back().z, z);
    return;
  }
  events_.push_back({t, z});
}

void EventLog::finish(double t_end, TerminalReason reason) {
  if (!events_.empty()) t_end = std::max(t_end, events_.back().t);
  terminal_.emplace(t_end, reason);
}

double EventLog::t_end() const {
  if (!terminal_) throw Error("event log has no terminal record");
  return terminal_->first;
}

TerminalReason EventLog::reason() const {
  if (!terminal_) throw Error("event log has no terminal record");
  return terminal_->second;
}

void EventLog::write_csv(std::ostream& out) const {
  out << "t,z\n";
  for (const Event& e : events_) out << fmt(e.t) << ',' << fmt(e.z) << '\n';
}

std::string EventLog::terminal_json() const {
  nlohmann::json j;
  j["t_end"] = t_end();
  j["reason"] = to_string(reason());
  j["events"] = events_.size();
  return j.dump();
}

EventLog EventLog::read_csv(std::istream& in) {
  EventLog log;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      if (line != "t,z") throw ParseError("expected header 't,z'", line_no);
      continue;
    }
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError("expected 't,z'", line_no);
    try {
      log.events_.push_back(
          {std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
    } catch (const std::exception&) {
      throw ParseError("malformed number", line_no);
    }
  }
  return log;
}

// ---------------------------------------------------------------------------
// Episode

std::vector<int> candidates(const MilpInstance& instance,
                            std::span<const double> x) {
  std::vector<int> out;
  for (int j = 0; j < instance.num_vars(); ++j) {
    if (!instance.is_integer(j)) continue;
    const double frac = x[j] - std::floor(x[j]);
    if (frac > kIntegralityTol && frac < 1.0 - kIntegralityTol) out.push_back(j);
  }
  return out;
}

Episode::Episode(const MilpInstance& instance, EpisodeConfig config)
    : instance_(instance), config_(std::move(config)) {
  if (!(config_.time_limit > 0.0)) {
    throw InvalidArgument("time_limit must be positive");
  }
  if (config_.node_limit && *config_.node_limit < 1) {
    throw InvalidArgument("node_limit must be positive");
  }
}

double Episode::elapsed() const {
  if (config_.clock == ClockMode::kVirtual) return virtual_time_ + charged_;
  const auto now = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(now - start_).count() + charged_;
}

VarBounds Episode::local_bounds(int node_id) const {
  VarBounds b = VarBounds::global(instance_);
  for (const BoundChange& ch : nodes_[node_id].changes) {
    if (ch.side == BoundSide::kLower) {
      b.lower[ch.var] = std::max(b.lower[ch.var], ch.value);
    } else {
      b.upper[ch.var] = std::min(b.upper[ch.var], ch.value);
    }
  }
  return b;
}

std::vector<int> Episode::open_nodes() const {
  std::vector<int> ids;
  for (const auto& [lb, id] : open_) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

double Episode::dual_bound() const {
  double z = kInf;
  if (!open_.empty()) z = open_.begin()->first;
  for (double f : failed_bounds_) z = std::min(z, f);
  if (incumbent_value_) z = std::min(z, *incumbent_value_);
  return z;
}

const Observation& Episode::observation() const {
  if (!observation_) throw Error("no pending observation");
  return *observation_;
}

StepResult Episode::reset() {
  nodes_.clear();
  open_.clear();
  failed_bounds_.clear();
  observation_.reset();
  terminal_.reset();
  log_ = EventLog();
  stats_ = TreeStats(instance_.num_vars(), instance_.num_rows());
  last_branching_.reset();
  incumbent_value_.reset();
  incumbent_.clear();
  processed_ = 0;
  failed_ = 0;
  virtual_time_ = 0.0;
  charged_ = 0.0;
  start_ = std::chrono::steady_clock::now();

  nodes_.emplace_back();
  const LpSolution lp = solve_relaxation(instance_, nullptr, nullptr, config_.lp);
  ++processed_;
  virtual_time_ += config_.seconds_per_node;
  process(0, lp);
  log_bound();
  if (elapsed() >= config_.time_limit) {
    return terminate(TerminalReason::kTimeLimit);
  }
  if (nodes_[0].lp_failed) return terminate(TerminalReason::kNumericalFailure);
  if (lp.status == LpStatus::kInfeasible) {
    return terminate(TerminalReason::kInfeasible);
  }
  return advance();
}

void Episode::process(int id, const LpSolution& lp) {
  BnbNode& node = nodes_[id];
  node.lp = lp;
  node.processed = true;
  const double parent_lb =
      node.parent_id >= 0 ? nodes_[node.parent_id].lower_bound : -kInf;
  switch (lp.status) {
    case LpStatus::kInfeasible:
      node.status = NodeStatus::kPrunedInfeasible;
      node.lower_bound = kInf;
      return;
    case LpStatus::kIterationLimit:
    case LpStatus::kUnbounded:
      if (config_.lp.trace) {
        std::fprintf(stderr, "node %d: LP %s, pruned with parent bound\n", id,
                     to_string(lp.status).c_str());
      }
      node.status = NodeStatus::kPrunedBound;
      node.lp_failed = true;
      node.lower_bound = parent_lb;
      failed_bounds_.push_back(parent_lb);
      ++failed_;
      return;
    case LpStatus::kOptimal:
      break;
  }
  stats_.record_lp(lp);
  node.lower_bound = std::max(lp.objective, parent_lb);
  if (incumbent_value_ && node.lower_bound >= *incumbent_value_ - kPruneTol) {
    node.status = NodeStatus::kPrunedBound;
    return;
  }
  if (candidates(instance_, lp.x).empty()) {
    node.status = NodeStatus::kIntegral;
    if (!incumbent_value_ || lp.objective < *incumbent_value_) {
      incumbent_value_ = lp.objective;
      incumbent_ = lp.x;
      stats_.record_incumbent(lp.x);
      prune_by_incumbent();
    }
    return;
  }
  node.status = NodeStatus::kOpen;
  open_.emplace(node.lower_bound, id);
}

void Episode::prune_by_incumbent() {
  while (!open_.empty()) {
    auto last = std::prev(open_.end());
    if (last->first < *incumbent_value_ - kPruneTol) break;
    nodes_[last->second].status = NodeStatus::kPrunedBound;
    open_.erase(last);
  }
}

StepResult Episode::step(int action) {
  if (terminal_) throw Error("episode already terminated");
  if (!observation_) throw Error("step called before reset");
  const auto& cands = observation_->candidates;
  if (!std::binary_search(cands.begin(), cands.end(), action)) {
    throw InvalidArgument("variable " + std::to_string(action) +
                          " is not a branching candidate of node " +
                          std::to_string(focus_));
  }

  const int parent = focus_;
  const VarBounds parent_bounds = focus_bounds_;
  const LpSolution parent_lp = std::move(nodes_[parent].lp);
  const double value = parent_lp.x[action];
  open_.erase({nodes_[parent].lower_bound, parent});
  nodes_[parent].status = NodeStatus::kBranched;
  nodes_[parent].branch_var = action;
  nodes_[parent].lp.status = parent_lp.status;
  nodes_[parent].lp.objective = parent_lp.objective;
  nodes_[parent].lp.iterations = parent_lp.iterations;

  const BoundChange down{action, BoundSide::kUpper, std::floor(value)};
  const BoundChange up{action, BoundSide::kLower, std::ceil(value)};
  int ids[2];
  for (int k = 0; k < 2; ++k) {
    ids[k] = static_cast<int>(nodes_.size());
    BnbNode child;
    child.id = ids[k];
    child.parent_id = parent;
    child.depth = nodes_[parent].depth + 1;
    child.changes = nodes_[parent].changes;
    child.changes.push_back(k == 0 ? down : up);
    child.lower_bound = nodes_[parent].lower_bound;
    nodes_.push_back(std::move(child));
  }
  nodes_[parent].children = {ids[0], ids[1]};

  BranchingRecord record;
  record.node_id = parent;
  record.var = action;
  record.parent_value = value;
  record.parent_bound = parent_lp.objective;
  for (int k = 0; k < 2; ++k) {
    const BoundChange& ch = k == 0 ? down : up;
    if (elapsed() >= config_.time_limit) {
      // Out of time: the child stays open with its parent's bound.
      open_.emplace(nodes_[ids[k]].lower_bound, ids[k]);
      continue;
    }
    const LpSolution lp = resolve_with_bound_change(
        instance_, parent_bounds, parent_lp, ch.var, ch.side, ch.value,
        config_.lp);
    ++processed_;
    virtual_time_ += config_.seconds_per_node;
    process(ids[k], lp);
    if (lp.status == LpStatus::kOptimal) {
      (k == 0 ? record.down_objective : record.up_objective) = lp.objective;
    }
  }
  last_branching_ = record;
  log_bound();
  return advance();
}

void Episode::log_bound() {
  const double z = dual_bound();
  if (!std::isfinite(z)) return;
  if (!log_.events().empty() && z <= log_.events().back().z) return;
  log_.record(std::min(elapsed(), config_.time_limit), z);
}

StepResult Episode::advance() {
  // A node that finished past the limit does not count as in time, even when
  // it closed the tree.
  if (elapsed() >= config_.time_limit) {
    return terminate(TerminalReason::kTimeLimit);
  }
  if (open_.empty()) {
    if (incumbent_value_) return terminate(TerminalReason::kSolved);
    return terminate(failed_ > 0 ? TerminalReason::kNumericalFailure
                                 : TerminalReason::kInfeasible);
  }
  if (config_.node_limit &&
      static_cast<std::int64_t>(nodes_.size()) >= *config_.node_limit) {
    return terminate(TerminalReason::kNodeLimit);
  }
  focus_ = open_.begin()->second;
  focus_bounds_ = local_bounds(focus_);
  observation_ = make_observation(focus_);
  return *observation_;
}

StepResult Episode::terminate(TerminalReason reason) {
  const double now = elapsed();
  log_.finish(std::min(now, config_.time_limit), reason);
  observation_.reset();
  terminal_ = Terminal{reason, dual_bound(), now};
  return *terminal_;
}

Observation Episode::make_observation(int id) {
  const BnbNode& node = nodes_[id];
  Observation obs;
  obs.candidates = candidates(instance_, node.lp.x);
  if (config_.compute_state) {
    obs.state = extract_state(instance_, focus_bounds_, node.lp, stats_);
  }
  obs.focus_node_id = id;
  obs.dual_bound = dual_bound();
  obs.elapsed = elapsed();
  return obs;
}

EpisodeResult run_episode(const MilpInstance& instance, EpisodeConfig config,
                          BranchingController& controller) {
  const auto start = std::chrono::steady_clock::now();
  config.compute_state = controller.needs_state();
  Episode episode(instance, std::move(config));
  controller.begin_episode(episode);
  StepResult result = episode.reset();
  while (const Observation* obs = std::get_if<Observation>(&result)) {
    const int action = controller.choose(episode, *obs);
    result = episode.step(action);
    controller.observe(episode);
  }
  EpisodeResult out;
  out.terminal = std::get<Terminal>(result);
  out.log = episode.event_log();
  out.nodes = static_cast<std::int64_t>(episode.nodes().size());
  out.processed = episode.processed_nodes();
  out.incumbent = episode.incumbent_value();
  out.wall_seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start)
                         .count();
  return out;
}

}  // namespace branchlab
