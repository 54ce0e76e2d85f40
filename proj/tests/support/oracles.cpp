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

#include "oracles.hpp"

#include <algorithm>
#include <cmath>

namespace branchlab::testing {

namespace {

// Gaussian elimination with partial pivoting; false when (near) singular.
bool solve_dense(std::vector<std::vector<double>> a, std::vector<double> rhs,
                 std::vector<double>& out) {
  const int n = static_cast<int>(rhs.size());
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) < 1e-10) return false;
    std::swap(a[pivot], a[col]);
    std::swap(rhs[pivot], rhs[col]);
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (int k = col; k < n; ++k) a[r][k] -= f * a[col][k];
      rhs[r] -= f * rhs[col];
    }
  }
  out.assign(n, 0.0);
  for (int r = n - 1; r >= 0; --r) {
    double s = rhs[r];
    for (int k = r + 1; k < n; ++k) s -= a[r][k] * out[k];
    out[r] = s / a[r][r];
  }
  return true;
}

std::vector<std::vector<double>> dense_rows(const MilpInstance& instance) {
  std::vector<std::vector<double>> rows(
      instance.num_rows(), std::vector<double>(instance.num_vars(), 0.0));
  for (const Coefficient& e : instance.entries()) {
    rows[e.row][e.col] = e.value;
  }
  return rows;
}

}  // namespace

std::optional<double> lp_by_vertex_enumeration(
    const MilpInstance& instance, const std::vector<double>& lower,
    const std::vector<double>& upper) {
  const int n = instance.num_vars();
  const int m = instance.num_rows();
  const auto rows = dense_rows(instance);

  // Constraint k: rows first, then x_j >= l_j, then x_j <= u_j.
  std::vector<std::vector<double>> lhs;
  std::vector<double> rhs;
  for (int i = 0; i < m; ++i) {
    lhs.push_back(rows[i]);
    rhs.push_back(instance.rhs()[i]);
  }
  for (int j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    e[j] = -1.0;
    lhs.push_back(e);
    rhs.push_back(-lower[j]);
  }
  for (int j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    e[j] = 1.0;
    lhs.push_back(e);
    rhs.push_back(upper[j]);
  }
  const int total = static_cast<int>(rhs.size());

  std::optional<double> best;
  std::vector<int> pick(n);
  for (int k = 0; k < n; ++k) pick[k] = k;
  std::vector<double> x;
  while (true) {
    std::vector<std::vector<double>> a;
    std::vector<double> b;
    for (int k : pick) {
      a.push_back(lhs[k]);
      b.push_back(rhs[k]);
    }
    if (solve_dense(a, b, x)) {
      bool ok = true;
      for (int k = 0; k < total && ok; ++k) {
        double act = 0.0;
        double scale = 1.0;
        for (int j = 0; j < n; ++j) {
          act += lhs[k][j] * x[j];
          scale = std::max(scale, std::abs(lhs[k][j] * x[j]));
        }
        ok = act <= rhs[k] + 1e-9 * std::max(scale, std::abs(rhs[k]));
      }
      if (ok) {
        double obj = 0.0;
        for (int j = 0; j < n; ++j) obj += instance.objective()[j] * x[j];
        if (!best || obj < *best) best = obj;
      }
    }
    // Next n-combination of [0, total).
    int i = n - 1;
    while (i >= 0 && pick[i] == total - n + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int k = i + 1; k < n; ++k) pick[k] = pick[k - 1] + 1;
  }
  return best;
}

std::optional<double> milp_by_enumeration(const MilpInstance& instance) {
  const int n = instance.num_vars();
  std::vector<long> lo(n), hi(n), x(n);
  for (int j = 0; j < n; ++j) {
    lo[j] = static_cast<long>(std::ceil(instance.lower()[j]));
    hi[j] = static_cast<long>(std::floor(instance.upper()[j]));
    if (lo[j] > hi[j]) return std::nullopt;
    x[j] = lo[j];
  }
  std::vector<double> point(n);
  std::optional<double> best;
  while (true) {
    for (int j = 0; j < n; ++j) point[j] = static_cast<double>(x[j]);
    if (dense_feasible(instance, point, 1e-9)) {
      double obj = 0.0;
      for (int j = 0; j < n; ++j) obj += instance.objective()[j] * point[j];
      if (!best || obj < *best) best = obj;
    }
    int j = 0;
    while (j < n && x[j] == hi[j]) {
      x[j] = lo[j];
      ++j;
    }
    if (j == n) break;
    ++x[j];
  }
  return best;
}

bool dense_feasible(const MilpInstance& instance, const std::vector<double>& x,
                    double tol) {
  const auto rows = dense_rows(instance);
  for (int i = 0; i < instance.num_rows(); ++i) {
    double act = 0.0;
    for (int j = 0; j < instance.num_vars(); ++j) act += rows[i][j] * x[j];
    if (act > instance.rhs()[i] + tol) return false;
  }
  for (int j = 0; j < instance.num_vars(); ++j) {
    if (x[j] < instance.lower()[j] - tol || x[j] > instance.upper()[j] + tol) {
      return false;
    }
    if (instance.is_integer(j) && std::abs(x[j] - std::round(x[j])) > tol) {
      return false;
    }
  }
  return true;
}

MilpInstance random_small_lp(Rng& rng, int n, int m) {
  MilpData data;
  data.name = "random_lp";
  std::vector<double> interior(n);
  for (int j = 0; j < n; ++j) {
    data.c.push_back(std::round((uniform01(rng) * 20.0 - 10.0) * 100) / 100);
    const double l = std::round(-uniform01(rng) * 5.0);
    const double u = l + 1.0 + std::round(uniform01(rng) * 5.0);
    data.lower.push_back(l);
    data.upper.push_back(u);
    data.integer.push_back(false);
    interior[j] = l + uniform01(rng) * (u - l);
  }
  for (int i = 0; i < m; ++i) {
    double act = 0.0;
    for (int j = 0; j < n; ++j) {
      if (uniform01(rng) < 0.7) {
        const double a = std::round((uniform01(rng) * 10.0 - 5.0) * 100) / 100;
        if (a == 0.0) continue;
        data.entries.push_back({i, j, a});
        act += a * interior[j];
      }
    }
    // Mostly feasible; a negative margin occasionally empties the polytope.
    data.b.push_back(std::round((act + uniform01(rng) * 4.0 - 1.0) * 100) /
                     100);
  }
  return MilpInstance(std::move(data));
}

MilpInstance random_binary_milp(Rng& rng, int n, int m) {
  MilpData data;
  data.name = "random_binary";
  const bool covering = uniform01(rng) < 0.5;
  for (int j = 0; j < n; ++j) {
    const double cost = static_cast<double>(uniform_int(rng, 1, 30));
    data.c.push_back(covering ? cost : -cost);
    data.lower.push_back(0.0);
    data.upper.push_back(1.0);
    data.integer.push_back(true);
  }
  for (int i = 0; i < m; ++i) {
    double total = 0.0;
    std::vector<int> cols;
    for (int j = 0; j < n; ++j) {
      if (uniform01(rng) < 0.4) cols.push_back(j);
    }
    if (cols.empty()) cols.push_back(static_cast<int>(uniform_int(rng, 0, n - 1)));
    for (int j : cols) {
      const double w = covering ? -1.0 : static_cast<double>(uniform_int(rng, 1, 20));
      data.entries.push_back({i, j, w});
      total += w;
    }
    data.b.push_back(covering ? -1.0 : std::floor(0.5 * total));
  }
  return MilpInstance(std::move(data));
}

BipartiteState random_state(Rng& rng, int m, int n, double density) {
  BipartiteState s;
  s.num_rows = m;
  s.num_vars = n;
  for (int k = 0; k < m * kConsFeatures; ++k) s.cons.push_back(2.0 * uniform01(rng) - 1.0);
  for (int k = 0; k < n * kVarFeatures; ++k) s.vars.push_back(2.0 * uniform01(rng) - 1.0);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      if (uniform01(rng) < density) {
        s.edge_row.push_back(i);
        s.edge_col.push_back(j);
        s.edge_val.push_back(2.0 * uniform01(rng) - 1.0);
      }
    }
  }
  return s;
}

BipartiteState permute_state(const BipartiteState& s,
                             const std::vector<int>& row_perm,
                             const std::vector<int>& var_perm, Rng& rng) {
  BipartiteState out = s;
  for (int i = 0; i < s.num_rows; ++i) {
    for (int f = 0; f < kConsFeatures; ++f) {
      out.cons[row_perm[i] * kConsFeatures + f] = s.cons[i * kConsFeatures + f];
    }
  }
  for (int j = 0; j < s.num_vars; ++j) {
    for (int f = 0; f < kVarFeatures; ++f) {
      out.vars[var_perm[j] * kVarFeatures + f] = s.vars[j * kVarFeatures + f];
    }
  }
  std::vector<std::size_t> order(s.num_edges());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  shuffle(order, rng);
  for (std::size_t k = 0; k < order.size(); ++k) {
    out.edge_row[k] = row_perm[s.edge_row[order[k]]];
    out.edge_col[k] = var_perm[s.edge_col[order[k]]];
    out.edge_val[k] = s.edge_val[order[k]];
  }
  return out;
}

}  // namespace branchlab::testing
