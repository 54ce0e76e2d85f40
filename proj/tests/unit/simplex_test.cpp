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


#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "branchlab/milp.hpp"
#include "branchlab/simplex.hpp"
#include "oracles.hpp"

namespace branchlab {
namespace {

MilpInstance lp(std::vector<double> c, std::vector<Coefficient> entries,
                std::vector<double> b, std::vector<double> lower,
                std::vector<double> upper) {
  MilpData d;
  d.c = std::move(c);
  d.entries = std::move(entries);
  d.b = std::move(b);
  d.lower = std::move(lower);
  d.upper = std::move(upper);
  d.integer.assign(d.c.size(), false);
  return MilpInstance(std::move(d));
}

// Largest |residual| of the optimality conditions, rows scaled to unit norm.
double kkt_residual(const MilpInstance& inst, const VarBounds& bounds,
                    const LpSolution& s) {
  const int n = inst.num_vars();
  double worst = 0.0;
  std::vector<double> at(n, 0.0);
  for (int i = 0; i < inst.num_rows(); ++i) {
    double act = 0.0, norm = 0.0;
    for (const Coefficient& e : inst.row(i)) {
      act += e.value * s.x[e.col];
      norm += e.value * e.value;
      at[e.col] += s.duals[i] * e.value;
    }
    norm = std::max(std::sqrt(norm), 1e-12);
    worst = std::max(worst, (act - inst.rhs()[i]) / norm);  // primal
    worst = std::max(worst, s.duals[i]);                    // dual sign
    worst = std::max(worst, std::abs(s.duals[i] * (act - inst.rhs()[i])) / norm);
  }
  for (int j = 0; j < n; ++j) {
    worst = std::max(worst, bounds.lower[j] - s.x[j]);
    worst = std::max(worst, s.x[j] - bounds.upper[j]);
    const double d = inst.objective()[j] - at[j];
    worst = std::max(worst, std::abs(d - s.reduced_costs[j]));
    // Positive reduced cost only at the lower bound, negative only at upper.
    if (d > 0) worst = std::max(worst, d * (s.x[j] - bounds.lower[j]));
    if (d < 0) worst = std::max(worst, -d * (bounds.upper[j] - s.x[j]));
  }
  return worst;
}

double dual_objective(const MilpInstance& inst, const VarBounds& bounds,
                      const LpSolution& s) {
  double v = 0.0;
  for (int i = 0; i < inst.num_rows(); ++i) v += s.duals[i] * inst.rhs()[i];
  for (int j = 0; j < inst.num_vars(); ++j) {
    const double d = s.reduced_costs[j];
    if (d > 0) v += d * bounds.lower[j];
    if (d < 0) v += d * bounds.upper[j];
  }
  return v;
}

TEST(SolveRelaxation, BoundAttainedOptimum) {
  const MilpInstance inst = lp({-1.0}, {}, {}, {0.0}, {3.0});
  const LpSolution s = solve_relaxation(inst);
  ASSERT_EQ(s.status, LpStatus::kOptimal);
  EXPECT_EQ(s.x[0], 3.0);
  EXPECT_EQ(s.objective, -3.0);
  EXPECT_EQ(s.basis_status[0], BasisStatus::kUpper);
}

TEST(SolveRelaxation, SymmetricVertex) {
  const MilpInstance inst =
      lp({-1.0, -1.0}, {{0, 0, 1.0}, {0, 1, 1.0}}, {1.0}, {0, 0}, {1, 1});
  const LpSolution s = solve_relaxation(inst);
  ASSERT_EQ(s.status, LpStatus::kOptimal);
  EXPECT_NEAR(s.objective, -1.0, 1e-12);
  EXPECT_TRUE(s.is_tight[0]);
  EXPECT_NEAR(s.duals[0], -1.0, 1e-12);
}

TEST(SolveRelaxation, InfeasibleAndUnbounded) {
  // x >= 2 written as -x <= -2 with x in [0, 1].
  const MilpInstance infeasible = lp({1.0}, {{0, 0, -1.0}}, {-2.0}, {0}, {1});
  EXPECT_EQ(solve_relaxation(infeasible).status, LpStatus::kInfeasible);

  const MilpInstance unbounded =
      lp({-1.0, 0.0}, {{0, 0, 1.0}, {0, 1, -1.0}}, {1.0}, {0, 0}, {kInf, kInf});
  EXPECT_EQ(solve_relaxation(unbounded).status, LpStatus::kUnbounded);

  VarBounds empty{{2.0}, {1.0}};
  const MilpInstance box = lp({1.0}, {}, {}, {0}, {3});
  EXPECT_EQ(solve_relaxation(box, &empty).status, LpStatus::kInfeasible);
}

TEST(SolveRelaxation, FreeVariables) {
  // min x + y s.t. x + y >= -3, x - y <= 1, both free.
  const MilpInstance inst =
      lp({1.0, 1.0}, {{0, 0, -1.0}, {0, 1, -1.0}, {1, 0, 1.0}, {1, 1, -1.0}},
         {3.0, 1.0}, {-kInf, -kInf}, {kInf, kInf});
  const LpSolution s = solve_relaxation(inst);
  ASSERT_EQ(s.status, LpStatus::kOptimal);
  EXPECT_NEAR(s.objective, -3.0, 1e-9);
}

TEST(SolveRelaxation, IterationLimit) {
  Rng rng(5);
  const MilpInstance inst = generate({Family::kSetCover, 20, 30, 0.2, 4});
  SimplexOptions opts;
  opts.max_iterations = 1;
  EXPECT_EQ(solve_relaxation(inst, nullptr, nullptr, opts).status,
            LpStatus::kIterationLimit);
}

TEST(SolveRelaxation, MatchesVertexEnumeration) {
  Rng rng(2026);
  int optimal = 0;
  for (int k = 0; k < 100; ++k) {
    const int n = 1 + static_cast<int>(uniform_int(rng, 0, 5));
    const int m = static_cast<int>(uniform_int(rng, 0, 4));
    const MilpInstance inst = testing::random_small_lp(rng, n, m);
    const VarBounds g = VarBounds::global(inst);
    const auto oracle = testing::lp_by_vertex_enumeration(inst, g.lower, g.upper);
    const LpSolution s = solve_relaxation(inst);
    if (!oracle) {
      EXPECT_EQ(s.status, LpStatus::kInfeasible) << "instance " << k;
      continue;
    }
    ++optimal;
    ASSERT_EQ(s.status, LpStatus::kOptimal) << "instance " << k;
    EXPECT_NEAR(s.objective, *oracle, 1e-9) << "instance " << k;
    EXPECT_LE(kkt_residual(inst, g, s), 1e-7) << "instance " << k;
    EXPECT_LE(std::abs(s.objective - dual_objective(inst, g, s)), 1e-7);
    EXPECT_EQ(std::count(s.basis.status().begin(), s.basis.status().end(),
                         BasisStatus::kBasic),
              inst.num_rows());
  }
  EXPECT_GT(optimal, 50);
}

TEST(ResolveWithBoundChange, InactiveBoundKeepsObjective) {
  const MilpInstance inst =
      lp({-1.0, -1.0}, {{0, 0, 1.0}, {0, 1, 2.0}}, {2.0}, {0, 0}, {1, 1});
  const VarBounds g = VarBounds::global(inst);
  const LpSolution base = solve_relaxation(inst);
  ASSERT_EQ(base.status, LpStatus::kOptimal);
  // x1 = 0.5 at the optimum; an upper bound of 0.9 is not binding.
  ASSERT_NEAR(base.x[1], 0.5, 1e-12);
  const LpSolution child =
      resolve_with_bound_change(inst, g, base, 1, BoundSide::kUpper, 0.9);
  EXPECT_EQ(child.objective, base.objective);
}

TEST(ResolveWithBoundChange, LowersUpperBound) {
  const MilpInstance inst = lp({-1.0}, {}, {}, {0.0}, {3.0});
  const VarBounds g = VarBounds::global(inst);
  const LpSolution base = solve_relaxation(inst);
  const LpSolution child =
      resolve_with_bound_change(inst, g, base, 0, BoundSide::kUpper, 1.0);
  ASSERT_EQ(child.status, LpStatus::kOptimal);
  EXPECT_EQ(child.objective, -1.0);
}

TEST(ResolveWithBoundChange, WarmMatchesCold) {
  Rng rng(77);
  int checked = 0;
  while (checked < 200) {
    const int n = 2 + static_cast<int>(uniform_int(rng, 0, 6));
    const int m = 1 + static_cast<int>(uniform_int(rng, 0, 5));
    const MilpInstance inst = testing::random_small_lp(rng, n, m);
    const VarBounds g = VarBounds::global(inst);
    const LpSolution base = solve_relaxation(inst);
    if (base.status != LpStatus::kOptimal) continue;
    const int var = static_cast<int>(uniform_int(rng, 0, n - 1));
    const BoundSide side =
        uniform01(rng) < 0.5 ? BoundSide::kLower : BoundSide::kUpper;
    const double value = g.lower[var] + uniform01(rng) * (g.upper[var] - g.lower[var]);
    const LpSolution warm =
        resolve_with_bound_change(inst, g, base, var, side, value);
    const VarBounds child = with_bound_change(g, var, side, value);
    const LpSolution cold = solve_relaxation(inst, &child);
    ASSERT_EQ(warm.status, cold.status) << "case " << checked;
    if (cold.status == LpStatus::kOptimal) {
      EXPECT_NEAR(warm.objective, cold.objective, 1e-7) << "case " << checked;
      // Monotonicity: a tighter domain never lowers the bound.
      EXPECT_GE(cold.objective, base.objective - 1e-9);
      EXPECT_LE(kkt_residual(inst, child, warm), 1e-7);
    }
    ++checked;
  }
}

TEST(ResolveWithBoundChange, WarmStartSavesPivots) {
  const MilpInstance inst = generate({Family::kSetCover, 40, 80, 0.1, 12});
  const VarBounds g = VarBounds::global(inst);
  const LpSolution base = solve_relaxation(inst);
  ASSERT_EQ(base.status, LpStatus::kOptimal);
  std::int64_t warm_total = 0, cold_total = 0;
  for (int j = 0; j < inst.num_vars(); ++j) {
    const double f = base.x[j] - std::floor(base.x[j]);
    if (f < 1e-6 || f > 1 - 1e-6) continue;
    const LpSolution warm = resolve_with_bound_change(
        inst, g, base, j, BoundSide::kUpper, std::floor(base.x[j]));
    const VarBounds child =
        with_bound_change(g, j, BoundSide::kUpper, std::floor(base.x[j]));
    const LpSolution cold = solve_relaxation(inst, &child);
    EXPECT_NEAR(warm.objective, cold.objective, 1e-7);
    warm_total += warm.iterations;
    cold_total += cold.iterations;
  }
  EXPECT_LT(warm_total, cold_total);
}

TEST(SolveRelaxation, GeneratedInstancesSatisfyKkt) {
  const Family families[] = {Family::kSetCover, Family::kMultiKnapsack,
                             Family::kBinPackApportion};
  for (int k = 0; k < 9; ++k) {
    const MilpInstance inst = generate({families[k % 3], 25, 30, 0.15,
                                        static_cast<std::uint64_t>(k)});
    const VarBounds g = VarBounds::global(inst);
    const LpSolution s = solve_relaxation(inst);
    ASSERT_EQ(s.status, LpStatus::kOptimal);
    EXPECT_LE(kkt_residual(inst, g, s), 1e-7) << "instance " << k;
    const LpSolution again = solve_relaxation(inst);
    EXPECT_EQ(again.x, s.x);
    EXPECT_EQ(again.iterations, s.iterations);
  }
}

TEST(SolveRelaxation, RejectsMismatchedBasis) {
  const MilpInstance inst = lp({-1.0}, {}, {}, {0.0}, {3.0});
  // A token from a different shape falls back to a cold start.
  LpBasis other(2, 0, {BasisStatus::kLower, BasisStatus::kLower});
  const LpSolution s = solve_relaxation(inst, nullptr, &other);
  EXPECT_EQ(s.status, LpStatus::kOptimal);
  EXPECT_EQ(s.objective, -3.0);
}

}  // namespace
}  // namespace branchlab
