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


// Classical branching rules: full strong branching, pseudocosts, reliability
// branching and uniform random choice, plus controllers that drive an Episode
// with each of them.

#ifndef BRANCHLAB_POLICIES_HPP_
#define BRANCHLAB_POLICIES_HPP_

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "branchlab/bnb.hpp"
#include "branchlab/common.hpp"
#include "branchlab/rng.hpp"
#include "branchlab/simplex.hpp"

namespace branchlab {

inline constexpr double kScoreEpsilon = 1e-6;
inline constexpr double kInfeasibleGain = 1e10;
inline constexpr std::int64_t kSbChildPivotCap = 500;

enum class ScoreRule : std::uint8_t { kStrongBranching, kPseudocost };

struct ScoredCandidates {
  std::vector<int> indices;
  std::vector<double> scores;
  std::vector<ScoreRule> rules;
  // Strong-branching gains; NaN for pseudocost-scored entries.
  std::vector<double> down_gain;
  std::vector<double> up_gain;
  // A child LP of this candidate stopped at the pivot cap (gain taken as 0).
  std::vector<bool> flagged;

  std::size_t size() const { return indices.size(); }
  // Variable with the largest score; ties go to the lowest variable index.
  int chosen() const;
  std::size_t chosen_position() const;
};

enum class Direction { kDown, kUp };

class PseudocostStore {
 public:
  explicit PseudocostStore(int num_vars = 0);

  // Records an objective gain for moving `var` by `distance` in (0, 1): the
  // fractional part f for a down branch, 1 - f for an up branch.
  void update(int var, Direction dir, double gain, double distance);

  double sum(int var, Direction dir) const;
  std::int64_t count(int var, Direction dir) const;
  // Per-variable average, or the episode-global average of that direction
  // when the variable has no history (1.0 when nothing is recorded).
  double average(int var, Direction dir) const;
  double global_average(Direction dir) const;
  int num_vars() const { return static_cast<int>(down_sum_.size()); }

  bool operator==(const PseudocostStore&) const = default;

 private:
  std::vector<double> down_sum_, up_sum_;
  std::vector<std::int64_t> down_count_, up_count_;
  double total_down_sum_ = 0.0, total_up_sum_ = 0.0;
  std::int64_t total_down_count_ = 0, total_up_count_ = 0;
};

// Feeds the children of the last branching into the store.
void update_from_branching(PseudocostStore& store,
                           const BranchingRecord& record);

struct StrongBranchingOptions {
  std::int64_t child_pivot_cap = kSbChildPivotCap;
  ExecMode mode = ExecMode::kParallel;
};

ScoredCandidates strong_branching_scores(
    const MilpInstance& instance, const VarBounds& bounds,
    const LpSolution& lp, const std::vector<int>& candidates,
    const StrongBranchingOptions& options = {});

ScoredCandidates pseudocost_scores(const LpSolution& lp,
                                   const std::vector<int>& candidates,
                                   const PseudocostStore& store);

// Candidates whose smaller direction count is below `threshold` are scored by
// strong branching and their gains are added to `store`; the rest by
// pseudocosts.
ScoredCandidates reliability_scores(
    const MilpInstance& instance, const VarBounds& bounds,
    const LpSolution& lp, const std::vector<int>& candidates,
    PseudocostStore& store, std::int64_t threshold,
    const StrongBranchingOptions& options = {});

int random_choice(const std::vector<int>& candidates, Rng& rng);

// One JSON line per decision when a trace stream is attached.
class TracedController : public BranchingController {
 public:
  void set_trace(std::ostream* out) { trace_ = out; }

 protected:
  void emit(int node_id, const ScoredCandidates& scored,
            const std::vector<std::int64_t>& prior_counts) const;
  std::ostream* trace_ = nullptr;
};

class StrongBranchingController : public TracedController {
 public:
  explicit StrongBranchingController(StrongBranchingOptions options = {})
      : options_(options) {}
  std::string name() const override { return "fsb"; }
  int choose(Episode& episode, const Observation& observation) override;

 private:
  StrongBranchingOptions options_;
};

class PseudocostController : public TracedController {
 public:
  std::string name() const override { return "pc"; }
  void begin_episode(const Episode& episode) override;
  int choose(Episode& episode, const Observation& observation) override;
  void observe(const Episode& episode) override;
  const PseudocostStore& store() const { return store_; }

 private:
  PseudocostStore store_;
};

class ReliabilityController : public TracedController {
 public:
  explicit ReliabilityController(std::int64_t threshold = 4,
                                 StrongBranchingOptions options = {})
      : threshold_(threshold), options_(options) {}
  std::string name() const override { return "reliability"; }
  void begin_episode(const Episode& episode) override;
  int choose(Episode& episode, const Observation& observation) override;
  void observe(const Episode& episode) override;
  const PseudocostStore& store() const { return store_; }

 private:
  std::int64_t threshold_;
  StrongBranchingOptions options_;
  PseudocostStore store_;
};

// Seeded from EpisodeConfig::seed at the start of every episode.
class RandomController : public TracedController {
 public:
  std::string name() const override { return "random"; }
  void begin_episode(const Episode& episode) override;
  int choose(Episode& episode, const Observation& observation) override;

 private:
  Rng rng_;
};

}  // namespace branchlab

#endif  // BRANCHLAB_POLICIES_HPP_
