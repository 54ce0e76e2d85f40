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


#include "branchlab/policies.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <ostream>

#include "json.hpp"

namespace branchlab {

std::size_t ScoredCandidates::chosen_position() const {
  if (indices.empty()) throw InvalidArgument("no candidates to choose from");
  std::size_t best = 0;
  for (std::size_t k = 1; k < indices.size(); ++k) {
    if (scores[k] > scores[best] ||
        (scores[k] == scores[best] && indices[k] < indices[best])) {
      best = k;
    }
  }
  return best;
}

int ScoredCandidates::chosen() const { return indices[chosen_position()]; }

// ---------------------------------------------------------------------------
// Pseudocosts

PseudocostStore::PseudocostStore(int num_vars)
    : down_sum_(num_vars, 0.0),
      up_sum_(num_vars, 0.0),
      down_count_(num_vars, 0),
      up_count_(num_vars, 0) {}

void PseudocostStore::update(int var, Direction dir, double gain,
                             double distance) {
  if (var < 0 || var >= num_vars()) {
    throw InvalidArgument("pseudocost update for unknown variable");
  }
  if (!(gain >= -1e-7) || !std::isfinite(gain)) {
    throw InvalidArgument("pseudocost gain must be finite and non-negative");
  }
  if (!(distance > 0.0 && distance < 1.0)) {
    throw InvalidArgument("pseudocost distance must lie in (0, 1)");
  }
  const double unit = std::max(gain, 0.0) / distance;
  if (dir == Direction::kDown) {
    down_sum_[var] += unit;
    ++down_count_[var];
    total_down_sum_ += unit;
    ++total_down_count_;
  } else {
    up_sum_[var] += unit;
    ++up_count_[var];
    total_up_sum_ += unit;
    ++total_up_count_;
  }
}

double PseudocostStore::sum(int var, Direction dir) const {
  return dir == Direction::kDown ? down_sum_[var] : up_sum_[var];
}

std::int64_t PseudocostStore::count(int var, Direction dir) const {
  return dir == Direction::kDown ? down_count_[var] : up_count_[var];
}

double PseudocostStore::global_average(Direction dir) const {
  const double s = dir == Direction::kDown ? total_down_sum_ : total_up_sum_;
  const std::int64_t c =
      dir == Direction::kDown ? total_down_count_ : total_up_count_;
  return c == 0 ? 1.0 : s / static_cast<double>(c);
}

double PseudocostStore::average(int var, Direction dir) const {
  const std::int64_t c = count(var, dir);
  if (c == 0) return global_average(dir);
  return sum(var, dir) / static_cast<double>(c);
}

void update_from_branching(PseudocostStore& store,
                           const BranchingRecord& record) {
  const double f = record.parent_value - std::floor(record.parent_value);
  if (!(f > 0.0 && f < 1.0)) return;
  if (record.down_objective) {
    store.update(record.var, Direction::kDown,
                 std::max(*record.down_objective - record.parent_bound, 0.0), f);
  }
  if (record.up_objective) {
    store.update(record.var, Direction::kUp,
                 std::max(*record.up_objective - record.parent_bound, 0.0),
                 1.0 - f);
  }
}

// ---------------------------------------------------------------------------
// Scores

namespace {

double product_score(double down, double up) {
  return std::max(down, kScoreEpsilon) * std::max(up, kScoreEpsilon);
}

ScoredCandidates sized(const std::vector<int>& candidates) {
  if (candidates.empty()) throw InvalidArgument("empty candidate list");
  ScoredCandidates out;
  const std::size_t k = candidates.size();
  out.indices = candidates;
  out.scores.assign(k, 0.0);
  out.rules.assign(k, ScoreRule::kPseudocost);
  out.down_gain.assign(k, std::numeric_limits<double>::quiet_NaN());
  out.up_gain.assign(k, std::numeric_limits<double>::quiet_NaN());
  out.flagged.assign(k, false);
  return out;
}

struct ChildGain {
  double gain = 0.0;
  bool flagged = false;
};

ChildGain child_gain(const MilpInstance& instance, const VarBounds& bounds,
                     const LpSolution& lp, int var, BoundSide side,
                     double value, const SimplexOptions& opts) {
  const LpSolution child =
      resolve_with_bound_change(instance, bounds, lp, var, side, value, opts);
  switch (child.status) {
    case LpStatus::kOptimal:
      return {child.objective - lp.objective, false};
    case LpStatus::kInfeasible:
      return {kInfeasibleGain, false};
    case LpStatus::kIterationLimit:
    case LpStatus::kUnbounded:
      break;
  }
  return {0.0, true};
}

// Positions in `positions` are scored by strong branching into `out`.
void score_by_sb(const MilpInstance& instance, const VarBounds& bounds,
                 const LpSolution& lp, const std::vector<std::size_t>& positions,
                 const StrongBranchingOptions& options, ScoredCandidates& out) {
  if (lp.status != LpStatus::kOptimal) {
    throw InvalidArgument("strong branching needs an OPTIMAL node LP");
  }
  SimplexOptions opts;
  opts.max_iterations = options.child_pivot_cap;
  const auto count = static_cast<std::int64_t>(positions.size());
  // vector<bool> packs bits, so flags are gathered per position first.
  std::vector<char> flags(positions.size(), 0);
  std::exception_ptr error;
  const bool parallel = options.mode == ExecMode::kParallel;
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::int64_t p = 0; p < count; ++p) {
    try {
      const std::size_t k = positions[p];
      const int var = out.indices[k];
      const double x = lp.x[var];
      const ChildGain down = child_gain(instance, bounds, lp, var,
                                        BoundSide::kUpper, std::floor(x), opts);
      const ChildGain up = child_gain(instance, bounds, lp, var,
                                      BoundSide::kLower, std::ceil(x), opts);
      out.down_gain[k] = down.gain;
      out.up_gain[k] = up.gain;
      flags[p] = down.flagged || up.flagged;
      out.rules[k] = ScoreRule::kStrongBranching;
      out.scores[k] = product_score(down.gain, up.gain);
    } catch (...) {
#pragma omp critical(branchlab_sb_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  for (std::size_t p = 0; p < positions.size(); ++p) {
    out.flagged[positions[p]] = flags[p] != 0;
  }
}

}  // namespace

ScoredCandidates strong_branching_scores(const MilpInstance& instance,
                                         const VarBounds& bounds,
                                         const LpSolution& lp,
                                         const std::vector<int>& candidates,
                                         const StrongBranchingOptions& options) {
  ScoredCandidates out = sized(candidates);
  std::vector<std::size_t> all(candidates.size());
  for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
  score_by_sb(instance, bounds, lp, all, options, out);
  return out;
}

ScoredCandidates pseudocost_scores(const LpSolution& lp,
                                   const std::vector<int>& candidates,
                                   const PseudocostStore& store) {
  ScoredCandidates out = sized(candidates);
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const int var = candidates[k];
    const double f = lp.x[var] - std::floor(lp.x[var]);
    out.scores[k] = product_score(store.average(var, Direction::kDown) * f,
                                  store.average(var, Direction::kUp) * (1 - f));
  }
  return out;
}

ScoredCandidates reliability_scores(const MilpInstance& instance,
                                    const VarBounds& bounds,
                                    const LpSolution& lp,
                                    const std::vector<int>& candidates,
                                    PseudocostStore& store,
                                    std::int64_t threshold,
                                    const StrongBranchingOptions& options) {
  ScoredCandidates out = sized(candidates);
  std::vector<std::size_t> unreliable;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const int var = candidates[k];
    const std::int64_t seen = std::min(store.count(var, Direction::kDown),
                                       store.count(var, Direction::kUp));
    if (seen < threshold) unreliable.push_back(k);
  }
  if (!unreliable.empty()) {
    score_by_sb(instance, bounds, lp, unreliable, options, out);
    for (std::size_t k : unreliable) {
      const int var = candidates[k];
      const double f = lp.x[var] - std::floor(lp.x[var]);
      if (out.flagged[k]) continue;
      if (out.down_gain[k] < kInfeasibleGain) {
        store.update(var, Direction::kDown, std::max(out.down_gain[k], 0.0), f);
      }
      if (out.up_gain[k] < kInfeasibleGain) {
        store.update(var, Direction::kUp, std::max(out.up_gain[k], 0.0), 1 - f);
      }
    }
  }
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (out.rules[k] == ScoreRule::kStrongBranching) continue;
    const int var = candidates[k];
    const double f = lp.x[var] - std::floor(lp.x[var]);
    out.scores[k] = product_score(store.average(var, Direction::kDown) * f,
                                  store.average(var, Direction::kUp) * (1 - f));
  }
  return out;
}

int random_choice(const std::vector<int>& candidates, Rng& rng) {
  if (candidates.empty()) throw InvalidArgument("empty candidate list");
  const auto k = uniform_int(rng, 0, static_cast<std::int64_t>(candidates.size()) - 1);
  return candidates[static_cast<std::size_t>(k)];
}

// ---------------------------------------------------------------------------
// Controllers

void TracedController::emit(int node_id, const ScoredCandidates& scored,
                            const std::vector<std::int64_t>& prior_counts) const {
  if (trace_ == nullptr) return;
  nlohmann::json j;
  j["node"] = node_id;
  j["policy"] = name();
  j["candidates"] = scored.indices;
  j["scores"] = scored.scores;
  std::vector<std::string> rules;
  for (ScoreRule r : scored.rules) {
    rules.push_back(r == ScoreRule::kStrongBranching ? "sb" : "pc");
  }
  j["rules"] = rules;
  if (!prior_counts.empty()) j["prior_counts"] = prior_counts;
  std::vector<bool> flagged(scored.flagged.begin(), scored.flagged.end());
  j["flagged"] = flagged;
  j["chosen"] = scored.chosen();
  *trace_ << j.dump() << '\n';
}

int StrongBranchingController::choose(Episode& episode,
                                      const Observation& observation) {
  const ScoredCandidates scored =
      strong_branching_scores(episode.instance(), episode.focus_bounds(),
                              episode.focus().lp, observation.candidates,
                              options_);
  emit(observation.focus_node_id, scored, {});
  return scored.chosen();
}

void PseudocostController::begin_episode(const Episode& episode) {
  store_ = PseudocostStore(episode.instance().num_vars());
}

int PseudocostController::choose(Episode& episode,
                                 const Observation& observation) {
  const ScoredCandidates scored =
      pseudocost_scores(episode.focus().lp, observation.candidates, store_);
  emit(observation.focus_node_id, scored, {});
  return scored.chosen();
}

void PseudocostController::observe(const Episode& episode) {
  if (episode.last_branching()) {
    update_from_branching(store_, *episode.last_branching());
  }
}

void ReliabilityController::begin_episode(const Episode& episode) {
  store_ = PseudocostStore(episode.instance().num_vars());
}

int ReliabilityController::choose(Episode& episode,
                                  const Observation& observation) {
  std::vector<std::int64_t> prior;
  if (trace_ != nullptr) {
    for (int var : observation.candidates) {
      prior.push_back(std::min(store_.count(var, Direction::kDown),
                               store_.count(var, Direction::kUp)));
    }
  }
  const ScoredCandidates scored = reliability_scores(
      episode.instance(), episode.focus_bounds(), episode.focus().lp,
      observation.candidates, store_, threshold_, options_);
  emit(observation.focus_node_id, scored, prior);
  return scored.chosen();
}

void ReliabilityController::observe(const Episode& episode) {
  if (episode.last_branching()) {
    update_from_branching(store_, *episode.last_branching());
  }
}

void RandomController::begin_episode(const Episode& episode) {
  rng_.seed(mix_seed(episode.config().seed, 0x52414e44));
}

int RandomController::choose(Episode& episode, const Observation& observation) {
  (void)episode;
  const int pick = random_choice(observation.candidates, rng_);
  if (trace_ != nullptr) {
    ScoredCandidates scored = sized(observation.candidates);
    for (std::size_t k = 0; k < scored.size(); ++k) {
      scored.scores[k] = scored.indices[k] == pick ? 1.0 : 0.0;
    }
    emit(observation.focus_node_id, scored, {});
  }
  return pick;
}

}  // namespace branchlab
