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

// Dense bounded-variable primal simplex for LP relaxations.
//
// Rows are brought to equality form A x + s = b with one slack s_i >= 0 per
// row. The solver keeps an explicit basis inverse, updated by eta pivots and
// refactored every kRefactorPeriod pivots. Infeasible starting points (cold
// starts with violated rows, or warm starts whose basic variables fall outside
// tightened bounds) are repaired by a phase 1 that minimizes the total bound
// violation of the basic variables.

#ifndef BRANCHLAB_SIMPLEX_HPP_
#define BRANCHLAB_SIMPLEX_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "branchlab/milp.hpp"

namespace branchlab {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

std::string to_string(LpStatus status);

enum class BasisStatus : std::uint8_t { kLower, kBasic, kUpper, kZero };

// Warm-start token. Holds one status per structural column followed by one
// per row slack.
class LpBasis {
 public:
  LpBasis() = default;
  LpBasis(int num_vars, int num_rows, std::vector<BasisStatus> status);

  bool empty() const { return status_.empty(); }
  int num_vars() const { return num_vars_; }
  int num_rows() const { return num_rows_; }
  std::span<const BasisStatus> status() const { return status_; }

  bool operator==(const LpBasis&) const = default;

 private:
  int num_vars_ = 0;
  int num_rows_ = 0;
  std::vector<BasisStatus> status_;
};

struct LpSolution {
  LpStatus status = LpStatus::kIterationLimit;
  std::vector<double> x;
  double objective = 0.0;
  // Multipliers of the <= rows (non-positive at an optimum).
  std::vector<double> duals;
  std::vector<double> reduced_costs;
  // Structural columns only; slack statuses live in `basis`.
  std::vector<BasisStatus> basis_status;
  std::vector<bool> is_tight;
  std::int64_t iterations = 0;
  LpBasis basis;
};

// Variable domains used for one solve. Defaults to the instance's globals.
struct VarBounds {
  std::vector<double> lower;
  std::vector<double> upper;

  static VarBounds global(const MilpInstance& instance);
  bool operator==(const VarBounds&) const = default;
};

enum class BoundSide {
  kLower,  // raise the lower bound to a value
  kUpper,  // lower the upper bound to a value
};

VarBounds with_bound_change(const VarBounds& bounds, int var, BoundSide side,
                            double value);

struct SimplexOptions {
  // 0 selects the default cap of 50 * (n + m) pivots.
  std::int64_t max_iterations = 0;
  // Pivot log on stderr; also switched on by BRANCHLAB_LP_TRACE=1.
  bool trace = false;
};

inline constexpr int kRefactorPeriod = 50;

LpSolution solve_relaxation(const MilpInstance& instance,
                            const VarBounds* local = nullptr,
                            const LpBasis* warm = nullptr,
                            const SimplexOptions& options = {});

// Solves the child obtained by one bound change, warm-started from `base`.
LpSolution resolve_with_bound_change(const MilpInstance& instance,
                                     const VarBounds& base_bounds,
                                     const LpSolution& base, int var,
                                     BoundSide side, double value,
                                     const SimplexOptions& options = {});

}  // namespace branchlab

#endif  // BRANCHLAB_SIMPLEX_HPP_
