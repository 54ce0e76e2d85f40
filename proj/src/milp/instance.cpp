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

#include <algorithm>
#include <cmath>
#include <set>

#include "branchlab/milp.hpp"

namespace branchlab {

MilpInstance::MilpInstance(MilpData data) : data_(std::move(data)) {
  const std::size_t n = data_.c.size();
  const std::size_t m = data_.b.size();
  if (n == 0) throw InvalidArgument("instance needs at least one variable");
  if (data_.lower.size() != n || data_.upper.size() != n ||
      data_.integer.size() != n) {
    throw InvalidArgument("bound or integrality vector length mismatch");
  }
  if (data_.objective_sign != 1.0 && data_.objective_sign != -1.0) {
    throw InvalidArgument("objective_sign must be +1 or -1");
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(data_.c[j])) {
      throw InvalidArgument("non-finite objective coefficient");
    }
    const double l = data_.lower[j];
    const double u = data_.upper[j];
    if (std::isnan(l) || std::isnan(u) || l == kInf || u == -kInf) {
      throw InvalidArgument("invalid bound on variable " + std::to_string(j));
    }
    if (l > u) {
      throw InvalidArgument("lower bound exceeds upper bound on variable " +
                            std::to_string(j));
    }
  }
  for (double v : data_.b) {
    if (!std::isfinite(v)) throw InvalidArgument("non-finite rhs");
  }

  std::sort(data_.entries.begin(), data_.entries.end(),
            [](const Coefficient& a, const Coefficient& b) {
              return a.row != b.row ? a.row < b.row : a.col < b.col;
            });
  for (std::size_t k = 0; k < data_.entries.size(); ++k) {
    const Coefficient& e = data_.entries[k];
    if (e.row < 0 || static_cast<std::size_t>(e.row) >= m || e.col < 0 ||
        static_cast<std::size_t>(e.col) >= n) {
      throw InvalidArgument("coefficient references invalid (row, col)");
    }
    if (!std::isfinite(e.value)) {
      throw InvalidArgument("non-finite matrix coefficient");
    }
    if (k > 0 && data_.entries[k - 1].row == e.row &&
        data_.entries[k - 1].col == e.col) {
      throw InvalidArgument("duplicate (row, col) coefficient");
    }
  }

  if (data_.var_names.empty()) {
    for (std::size_t j = 0; j < n; ++j) {
      data_.var_names.push_back("x" + std::to_string(j));
    }
  }
  if (data_.row_names.empty()) {
    for (std::size_t i = 0; i < m; ++i) {
      data_.row_names.push_back("r" + std::to_string(i));
    }
  }
  if (data_.var_names.size() != n || data_.row_names.size() != m) {
    throw InvalidArgument("name vector length mismatch");
  }

  row_start_.assign(m + 1, 0);
  for (const Coefficient& e : data_.entries) ++row_start_[e.row + 1];
  for (std::size_t i = 0; i < m; ++i) row_start_[i + 1] += row_start_[i];
  num_integer_ = static_cast<int>(
      std::count(data_.integer.begin(), data_.integer.end(), true));
}

MilpInstance normalize(const RawModel& model) {
  const std::size_t n = model.c.size();
  MilpData data;
  data.name = model.name;
  data.objective_sign = model.maximize ? -1.0 : 1.0;
  data.c = model.c;
  if (model.maximize) {
    for (double& v : data.c) v = -v;
  }
  data.lower = model.lower;
  data.upper = model.upper;
  data.integer = model.integer;
  data.var_names = model.var_names;
  data.metadata = model.metadata;

  auto emit = [&](const RawRow& row, double sign, const std::string& name) {
    const int i = static_cast<int>(data.b.size());
    for (const auto& [col, coef] : row.terms) {
      if (coef == 0.0) continue;
      if (col < 0 || static_cast<std::size_t>(col) >= n) {
        throw InvalidArgument("row " + row.name + " references column " +
                              std::to_string(col));
      }
      data.entries.push_back({i, col, sign * coef});
    }
    data.b.push_back(sign * row.rhs);
    data.row_names.push_back(name);
  };
  for (const RawRow& row : model.rows) {
    switch (row.sense) {
      case RowSense::kLe:
        emit(row, 1.0, row.name);
        break;
      case RowSense::kGe:
        emit(row, -1.0, row.name);
        break;
      case RowSense::kEq:
        emit(row, 1.0, row.name + "_le");
        emit(row, -1.0, row.name + "_ge");
        break;
    }
  }
  return MilpInstance(std::move(data));
}

RawModel to_raw(const MilpInstance& instance) {
  const MilpData& d = instance.data();
  RawModel model;
  model.name = d.name;
  model.maximize = d.objective_sign < 0;
  model.c = d.c;
  if (model.maximize) {
    for (double& v : model.c) v = -v;
  }
  model.lower = d.lower;
  model.upper = d.upper;
  model.integer = d.integer;
  model.var_names = d.var_names;
  model.metadata = d.metadata;
  for (int i = 0; i < instance.num_rows(); ++i) {
    RawRow row;
    row.name = d.row_names[i];
    row.sense = RowSense::kLe;
    row.rhs = d.b[i];
    for (const Coefficient& e : instance.row(i)) {
      row.terms.emplace_back(e.col, e.value);
    }
    model.rows.push_back(std::move(row));
  }
  return model;
}

Solution evaluate_solution(const MilpInstance& instance,
                           std::span<const double> x) {
  const int n = instance.num_vars();
  if (static_cast<int>(x.size()) != n) {
    throw InvalidArgument("solution length does not match instance");
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw InvalidArgument("non-finite solution entry");
  }
  Solution sol;
  sol.x.assign(x.begin(), x.end());
  const auto c = instance.objective();
  for (int j = 0; j < n; ++j) sol.objective += c[j] * x[j];

  double violation = 0.0;
  for (int i = 0; i < instance.num_rows(); ++i) {
    double activity = 0.0;
    for (const Coefficient& e : instance.row(i)) activity += e.value * x[e.col];
    violation = std::max(violation, activity - instance.rhs()[i]);
  }
  double int_residual = 0.0;
  for (int j = 0; j < n; ++j) {
    violation = std::max(violation, instance.lower()[j] - x[j]);
    violation = std::max(violation, x[j] - instance.upper()[j]);
    if (instance.is_integer(j)) {
      int_residual = std::max(int_residual, std::abs(x[j] - std::round(x[j])));
    }
  }
  sol.integrality_residual = int_residual;
  sol.max_violation = std::max(violation, int_residual);
  sol.feasible =
      sol.max_violation <= kFeasibilityTol && int_residual <= kIntegralityTol;
  return sol;
}

std::string to_string(Family family) {
  switch (family) {
    case Family::kSetCover:
      return "set_cover";
    case Family::kMultiKnapsack:
      return "multiknapsack";
    case Family::kBinPackApportion:
      return "bin_pack_apportion";
  }
  return "unknown";
}

Family family_from_string(std::string_view name) {
  if (name == "set_cover") return Family::kSetCover;
  if (name == "multiknapsack") return Family::kMultiKnapsack;
  if (name == "bin_pack_apportion") return Family::kBinPackApportion;
  throw InvalidArgument("unknown instance family: " + std::string(name));
}

}  // namespace branchlab
