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


// Imitation data collection: branch-and-bound episodes in which the
// strong-branching expert is queried with probability p_sb and pseudocosts
// branch otherwise.

#ifndef BRANCHLAB_DATAGEN_HPP_
#define BRANCHLAB_DATAGEN_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "branchlab/bnb.hpp"
#include "branchlab/dataset.hpp"
#include "branchlab/gcnn.hpp"
#include "branchlab/milp.hpp"

namespace branchlab {

struct CollectionConfig {
  double time_limit = 60.0;  // per instance episode
  double p_sb = 1.0;
  std::uint64_t target_samples = 1000;
  std::uint64_t seed = 0;
  ClockMode clock = ClockMode::kVirtual;
  double seconds_per_node = 0.01;
  std::int64_t node_limit = 0;  // 0: none
  // Upper bound on round-robin passes over the instance list.
  int max_passes = 10;
  // Instances run concurrently in blocks of this size.
  int block_size = 8;
  ExecMode mode = ExecMode::kParallel;
  // One JSON line per node visit: instance, pass, node, expert.
  std::ostream* trace = nullptr;

  // FNV-1a over the fields that change the collected data.
  std::uint64_t digest() const;
};

// Throws InvalidArgument for p_sb outside [0, 1] or a zero target, and Error
// when no sample can be collected (p_sb = 0, every root integral, ...).
Dataset collect(const std::vector<MilpInstance>& instances,
                const CollectionConfig& config);

// 0-based position of `action` when candidates are ordered by logit
// (descending), ties by lower variable index.
std::size_t candidate_rank(std::span<const double> logits,
                           const std::vector<int>& candidates, int action);

// Percentage of samples whose expert action ranks below k, per entry of ks.
// k larger than the candidate count always hits.
std::vector<double> top_k_accuracy(const GcnnParams& params,
                                   const std::vector<Sample>& samples,
                                   const std::vector<int>& ks = {1, 3, 5, 10},
                                   ExecMode mode = ExecMode::kParallel);

}  // namespace branchlab

#endif  // BRANCHLAB_DATAGEN_HPP_
