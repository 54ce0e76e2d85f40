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


#include "branchlab/features.hpp"

#include <algorithm>
#include <cmath>

namespace branchlab {

namespace {

constexpr double kSnapTol = 1e-9;

double age(std::int64_t first, std::int64_t total) {
  if (first == 0 || total == 0) return 0.0;
  const double a = static_cast<double>(total - first + 1) /
                   static_cast<double>(total);
  return std::clamp(a, 0.0, 1.0);
}

bool near(double a, double b) {
  return std::abs(a - b) <= kSnapTol * std::max(1.0, std::abs(b));
}

}  // namespace

TreeStats::TreeStats(int num_vars, int num_rows)
    : row_first_tight_(num_rows, 0),
      var_first_basic_(num_vars, 0),
      incumbent_sum_(num_vars, 0.0) {}

void TreeStats::record_lp(const LpSolution& lp) {
  ++total_lps_;
  for (std::size_t i = 0; i < row_first_tight_.size(); ++i) {
    if (row_first_tight_[i] == 0 && lp.is_tight[i]) {
      row_first_tight_[i] = total_lps_;
    }
  }
  for (std::size_t j = 0; j < var_first_basic_.size(); ++j) {
    if (var_first_basic_[j] == 0 && lp.basis_status[j] == BasisStatus::kBasic) {
      var_first_basic_[j] = total_lps_;
    }
  }
}

void TreeStats::record_incumbent(std::span<const double> x) {
  incumbent_.emplace(x.begin(), x.end());
  for (std::size_t j = 0; j < incumbent_sum_.size(); ++j) {
    incumbent_sum_[j] += x[j];
  }
  ++incumbent_count_;
}

double TreeStats::incumbent_average(int j) const {
  if (incumbent_count_ == 0) return 0.0;
  return incumbent_sum_[j] / static_cast<double>(incumbent_count_);
}

BipartiteState extract_state(const MilpInstance& instance,
                             const VarBounds& bounds, const LpSolution& lp,
                             const TreeStats& stats) {
  if (lp.status != LpStatus::kOptimal) {
    throw InvalidArgument("extract_state needs an OPTIMAL LP solution");
  }
  const int n = instance.num_vars();
  const int m = instance.num_rows();
  const auto c = instance.objective();
  BipartiteState s;
  s.num_rows = m;
  s.num_vars = n;

  double c_norm = 0.0;
  for (double v : c) c_norm += v * v;
  c_norm = std::sqrt(c_norm);
  s.zero_objective_norm = c_norm == 0.0;
  const double inv_c = s.zero_objective_norm ? 0.0 : 1.0 / c_norm;

  s.cons.assign(static_cast<std::size_t>(m) * kConsFeatures, 0.0);
  s.edge_row.reserve(instance.num_nonzeros());
  s.edge_col.reserve(instance.num_nonzeros());
  s.edge_val.reserve(instance.num_nonzeros());
  for (int i = 0; i < m; ++i) {
    const auto row = instance.row(i);
    double norm = 0.0;
    double dot = 0.0;
    for (const Coefficient& e : row) {
      norm += e.value * e.value;
      dot += e.value * c[e.col];
    }
    norm = std::sqrt(norm);
    const bool zero_row = norm == 0.0;
    if (zero_row) s.zero_norm_rows.push_back(i);
    const double inv_a = zero_row ? 0.0 : 1.0 / norm;
    double* f = &s.cons[static_cast<std::size_t>(i) * kConsFeatures];
    f[kConsObjCosSim] = std::clamp(dot * inv_a * inv_c, -1.0, 1.0);
    f[kConsBias] = instance.rhs()[i] * inv_a;
    f[kConsIsTight] = lp.is_tight[i] ? 1.0 : 0.0;
    // y_i scales as 1/lambda when row i is scaled by lambda, so it is
    // multiplied by the row norm to keep the feature row-scale invariant.
    f[kConsDualsolVal] = lp.duals[i] * norm * inv_c;
    f[kConsAge] = age(stats.row_first_tight(i), stats.total_lps());
    for (const Coefficient& e : row) {
      s.edge_row.push_back(i);
      s.edge_col.push_back(e.col);
      s.edge_val.push_back(e.value * inv_a);
    }
  }

  s.vars.assign(static_cast<std::size_t>(n) * kVarFeatures, 0.0);
  const auto& incumbent = stats.incumbent();
  for (int j = 0; j < n; ++j) {
    double* f = &s.vars[static_cast<std::size_t>(j) * kVarFeatures];
    const double x = lp.x[j];
    const double lo = bounds.lower[j];
    const double up = bounds.upper[j];
    if (instance.is_binary(j)) {
      f[kVarTypeBinary] = 1.0;
    } else if (instance.is_integer(j)) {
      f[kVarTypeInteger] = 1.0;
    } else {
      f[kVarTypeContinuous] = 1.0;
    }
    f[kVarCoef] = c[j] * inv_c;
    f[kVarHasLb] = std::isfinite(lo) ? 1.0 : 0.0;
    f[kVarHasUb] = std::isfinite(up) ? 1.0 : 0.0;
    f[kVarSolIsAtLb] = std::isfinite(lo) && near(x, lo) ? 1.0 : 0.0;
    f[kVarSolIsAtUb] = std::isfinite(up) && near(x, up) ? 1.0 : 0.0;
    if (instance.is_integer(j)) {
      const double frac = x - std::floor(x);
      f[kVarSolFrac] = (frac < kSnapTol || frac > 1.0 - kSnapTol) ? 0.0 : frac;
    }
    switch (lp.basis_status[j]) {
      case BasisStatus::kLower:
        f[kVarBasisLower] = 1.0;
        break;
      case BasisStatus::kBasic:
        f[kVarBasisBasic] = 1.0;
        break;
      case BasisStatus::kUpper:
        f[kVarBasisUpper] = 1.0;
        break;
      case BasisStatus::kZero:
        f[kVarBasisZero] = 1.0;
        break;
    }
    f[kVarReducedCost] = lp.reduced_costs[j] * inv_c;
    f[kVarAge] = age(stats.var_first_basic(j), stats.total_lps());
    f[kVarSolVal] = x;
    if (incumbent) {
      f[kVarIncVal] = (*incumbent)[j];
      f[kVarAvgIncVal] = stats.incumbent_average(j);
    }
  }
  return s;
}

}  // namespace branchlab
