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


// Bipartite state of a focus node: constraint nodes, variable nodes and one
// edge per structural nonzero, with fixed per-node feature columns.

#ifndef BRANCHLAB_FEATURES_HPP_
#define BRANCHLAB_FEATURES_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "branchlab/milp.hpp"
#include "branchlab/simplex.hpp"

namespace branchlab {

inline constexpr int kConsFeatures = 5;
inline constexpr int kEdgeFeatures = 1;
inline constexpr int kVarFeatures = 19;

// Column order of BipartiteState::cons.
enum ConsFeature : int {
  kConsObjCosSim = 0,
  kConsBias,
  kConsIsTight,
  kConsDualsolVal,
  kConsAge,
};

// Column order of BipartiteState::vars.
enum VarFeature : int {
  kVarTypeBinary = 0,
  kVarTypeInteger,
  kVarTypeImplInteger,
  kVarTypeContinuous,
  kVarCoef,
  kVarHasLb,
  kVarHasUb,
  kVarSolIsAtLb,
  kVarSolIsAtUb,
  kVarSolFrac,
  kVarBasisLower,
  kVarBasisBasic,
  kVarBasisUpper,
  kVarBasisZero,
  kVarReducedCost,
  kVarAge,
  kVarSolVal,
  kVarIncVal,
  kVarAvgIncVal,
};

struct BipartiteState {
  int num_rows = 0;
  int num_vars = 0;
  std::vector<double> cons;  // num_rows x kConsFeatures, row-major
  // Edges sorted by (row, col), one per nonzero of A.
  std::vector<int> edge_row;
  std::vector<int> edge_col;
  std::vector<double> edge_val;
  std::vector<double> vars;  // num_vars x kVarFeatures, row-major
  // Guarded divisions: the affected features were set to 0.
  bool zero_objective_norm = false;
  std::vector<int> zero_norm_rows;

  std::size_t num_edges() const { return edge_val.size(); }
  double con(int i, int f) const { return cons[i * kConsFeatures + f]; }
  double var(int j, int f) const { return vars[j * kVarFeatures + f]; }

  bool operator==(const BipartiteState&) const = default;
};

// Episode-wide history the age and incumbent features are computed from.
class TreeStats {
 public:
  TreeStats() = default;
  TreeStats(int num_vars, int num_rows);

  // Called once per node LP solved by the engine.
  void record_lp(const LpSolution& lp);
  void record_incumbent(std::span<const double> x);

  std::int64_t total_lps() const { return total_lps_; }
  // 1-based LP index at which row i was first tight (0 = never).
  std::int64_t row_first_tight(int i) const { return row_first_tight_[i]; }
  // 1-based LP index at which variable j was first basic (0 = never).
  std::int64_t var_first_basic(int j) const { return var_first_basic_[j]; }
  const std::optional<std::vector<double>>& incumbent() const {
    return incumbent_;
  }
  std::int64_t incumbent_count() const { return incumbent_count_; }
  double incumbent_average(int j) const;

 private:
  std::int64_t total_lps_ = 0;
  std::vector<std::int64_t> row_first_tight_;
  std::vector<std::int64_t> var_first_basic_;
  std::optional<std::vector<double>> incumbent_;
  std::vector<double> incumbent_sum_;
  std::int64_t incumbent_count_ = 0;
};

// `bounds` are the focus node's local domains; `lp` must be OPTIMAL.
BipartiteState extract_state(const MilpInstance& instance,
                             const VarBounds& bounds, const LpSolution& lp,
                             const TreeStats& stats);

}  // namespace branchlab

#endif  // BRANCHLAB_FEATURES_HPP_
