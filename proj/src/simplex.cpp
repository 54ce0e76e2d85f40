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

#include "branchlab/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>

#include <Eigen/Dense>

namespace branchlab {

std::string to_string(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal:
      return "OPTIMAL";
    case LpStatus::kInfeasible:
      return "INFEASIBLE";
    case LpStatus::kUnbounded:
      return "UNBOUNDED";
    case LpStatus::kIterationLimit:
      return "ITERATION_LIMIT";
  }
  return "UNKNOWN";
}

LpBasis::LpBasis(int num_vars, int num_rows, std::vector<BasisStatus> status)
    : num_vars_(num_vars), num_rows_(num_rows), status_(std::move(status)) {
  if (static_cast<int>(status_.size()) != num_vars + num_rows) {
    throw InvalidArgument("basis status length does not match shape");
  }
}

VarBounds VarBounds::global(const MilpInstance& instance) {
  return {{instance.lower().begin(), instance.lower().end()},
          {instance.upper().begin(), instance.upper().end()}};
}

VarBounds with_bound_change(const VarBounds& bounds, int var, BoundSide side,
                            double value) {
  VarBounds out = bounds;
  if (side == BoundSide::kLower) {
    out.lower[var] = value;
  } else {
    out.upper[var] = value;
  }
  return out;
}

namespace {

constexpr double kPrimalTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr double kTightTol = 1e-6;

bool trace_from_env() {
  const char* flag = std::getenv("BRANCHLAB_LP_TRACE");
  return flag != nullptr && std::strcmp(flag, "1") == 0;
}

class Simplex {
 public:
  Simplex(const MilpInstance& instance, const VarBounds& bounds,
          const SimplexOptions& options)
      : instance_(instance),
        n_(instance.num_vars()),
        m_(instance.num_rows()),
        total_(n_ + m_),
        trace_(options.trace || trace_from_env()) {
    max_iterations_ = options.max_iterations > 0
                          ? options.max_iterations
                          : 50 * static_cast<std::int64_t>(total_);
    dense_.assign(static_cast<std::size_t>(m_) * n_, 0.0);
    for (const Coefficient& e : instance.entries()) {
      dense_[static_cast<std::size_t>(e.col) * m_ + e.row] = e.value;
    }
    cost_.assign(total_, 0.0);
    lb_.assign(total_, 0.0);
    ub_.assign(total_, kInf);
    for (int j = 0; j < n_; ++j) {
      cost_[j] = instance.objective()[j];
      lb_[j] = bounds.lower[j];
      ub_[j] = bounds.upper[j];
    }
    rhs_ = Eigen::Map<const Eigen::VectorXd>(instance.rhs().data(), m_);
  }

  LpSolution run(const LpBasis* warm) {
    for (int j = 0; j < n_; ++j) {
      if (lb_[j] > ub_[j]) return finish(LpStatus::kInfeasible);
    }
    if (!(warm != nullptr && load_warm(*warm) && factor())) {
      load_cold();
      factor();
    }
    compute_basic_values();

    int since_refactor = 0;
    int degenerate_run = 0;
    bool bland = false;
    Eigen::VectorXd basic_cost(m_);
    Eigen::VectorXd alpha(m_);
    Eigen::VectorXd column(m_);

    while (true) {
      if (since_refactor >= kRefactorPeriod) {
        if (!factor()) return finish(LpStatus::kIterationLimit);
        compute_basic_values();
        since_refactor = 0;
      }

      bool infeasible = false;
      for (int r = 0; r < m_; ++r) {
        const int k = head_[r];
        const double v = x_[k];
        if (v < lb_[k] - kPrimalTol) {
          basic_cost[r] = -1.0;
          infeasible = true;
        } else if (v > ub_[k] + kPrimalTol) {
          basic_cost[r] = 1.0;
          infeasible = true;
        } else {
          basic_cost[r] = 0.0;
        }
      }
      if (!infeasible) {
        for (int r = 0; r < m_; ++r) basic_cost[r] = cost_[head_[r]];
      }
      const Eigen::VectorXd y = binv_.transpose() * basic_cost;

      // Pricing: Dantzig, or Bland's smallest index after a degenerate run.
      int entering = -1;
      int direction = 0;
      double best = 0.0;
      for (int j = 0; j < total_; ++j) {
        const BasisStatus s = status_[j];
        if (s == BasisStatus::kBasic || lb_[j] == ub_[j]) continue;
        const double cj = infeasible ? 0.0 : cost_[j];
        const double d = cj - column_dot(j, y);
        int dir = 0;
        if (s == BasisStatus::kLower && d < -kDualTol) {
          dir = 1;
        } else if (s == BasisStatus::kUpper && d > kDualTol) {
          dir = -1;
        } else if (s == BasisStatus::kZero && std::abs(d) > kDualTol) {
          dir = d < 0 ? 1 : -1;
        }
        if (dir == 0) continue;
        if (bland) {
          entering = j;
          direction = dir;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          entering = j;
          direction = dir;
        }
      }

      if (entering < 0) {
        if (since_refactor > 0) {
          // Confirm on a fresh factorization before declaring the outcome.
          if (!factor()) return finish(LpStatus::kIterationLimit);
          compute_basic_values();
          since_refactor = 0;
          continue;
        }
        return finish(infeasible ? LpStatus::kInfeasible : LpStatus::kOptimal);
      }
      if (iterations_ >= max_iterations_) {
        return finish(LpStatus::kIterationLimit);
      }

      load_column(entering, column);
      alpha.noalias() = binv_ * column;

      // Ratio test. Infeasible basics block where they become feasible.
      double theta = kInf;
      if (std::isfinite(lb_[entering]) && std::isfinite(ub_[entering])) {
        theta = ub_[entering] - lb_[entering];
      }
      int leave_pos = -1;
      double leave_value = 0.0;
      BasisStatus leave_status = BasisStatus::kLower;
      double leave_pivot = 0.0;
      for (int r = 0; r < m_; ++r) {
        const double a = alpha[r];
        if (std::abs(a) <= kPivotTol) continue;
        const double rate = -direction * a;
        const int k = head_[r];
        const double v = x_[k];
        double bound;
        BasisStatus status;
        if (rate > 0) {
          if (v < lb_[k] - kPrimalTol) {
            bound = lb_[k];
            status = BasisStatus::kLower;
          } else if (v > ub_[k] + kPrimalTol || !std::isfinite(ub_[k])) {
            continue;
          } else {
            bound = ub_[k];
            status = BasisStatus::kUpper;
          }
        } else {
          if (v > ub_[k] + kPrimalTol) {
            bound = ub_[k];
            status = BasisStatus::kUpper;
          } else if (v < lb_[k] - kPrimalTol || !std::isfinite(lb_[k])) {
            continue;
          } else {
            bound = lb_[k];
            status = BasisStatus::kLower;
          }
        }
        const double t = std::max(0.0, (bound - v) / rate);
        const double slack = 1e-12 * std::max(1.0, t);
        bool take = false;
        if (leave_pos < 0 ? t < theta : t < theta - slack) {
          take = true;
        } else if (leave_pos >= 0 && std::abs(t - theta) <= slack) {
          take = bland ? k < head_[leave_pos]
                       : std::abs(a) > std::abs(leave_pivot);
        }
        if (take) {
          theta = std::min(theta, t);
          leave_pos = r;
          leave_value = bound;
          leave_status = status;
          leave_pivot = a;
        }
      }

      if (!std::isfinite(theta)) {
        // Phase 1 cannot be unbounded; reaching here means numerical trouble.
        return finish(infeasible ? LpStatus::kIterationLimit
                                 : LpStatus::kUnbounded);
      }

      ++iterations_;
      x_[entering] += direction * theta;
      for (int r = 0; r < m_; ++r) {
        x_[head_[r]] -= direction * alpha[r] * theta;
      }
      int leaving_var = -1;
      if (leave_pos < 0) {
        status_[entering] =
            direction > 0 ? BasisStatus::kUpper : BasisStatus::kLower;
        x_[entering] = direction > 0 ? ub_[entering] : lb_[entering];
      } else {
        leaving_var = head_[leave_pos];
        x_[leaving_var] = leave_value;
        status_[leaving_var] = leave_status;
        head_[leave_pos] = entering;
        status_[entering] = BasisStatus::kBasic;
        const Eigen::RowVectorXd pivot_row =
            binv_.row(leave_pos) / alpha[leave_pos];
        binv_.noalias() -= alpha * pivot_row;
        binv_.row(leave_pos) = pivot_row;
        ++since_refactor;
      }
      if (trace_) {
        std::fprintf(stderr,
                     "lp iter %lld phase %d enter %d leave %d theta %.6g%s\n",
                     static_cast<long long>(iterations_), infeasible ? 1 : 2,
                     entering, leaving_var,
                     theta, bland ? " bland" : "");
      }

      if (theta <= 1e-12) {
        if (++degenerate_run > 2 * total_) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }
    }
  }

 private:
  double column_dot(int j, const Eigen::VectorXd& y) const {
    if (j >= n_) return y[j - n_];
    const double* col = dense_.data() + static_cast<std::size_t>(j) * m_;
    double sum = 0.0;
    for (int i = 0; i < m_; ++i) sum += col[i] * y[i];
    return sum;
  }

  void load_column(int j, Eigen::VectorXd& out) const {
    if (j >= n_) {
      out.setZero();
      out[j - n_] = 1.0;
      return;
    }
    out = Eigen::Map<const Eigen::VectorXd>(
        dense_.data() + static_cast<std::size_t>(j) * m_, m_);
  }

  BasisStatus nonbasic_at(int j, BasisStatus hint) const {
    const bool has_lower = std::isfinite(lb_[j]);
    const bool has_upper = std::isfinite(ub_[j]);
    if (hint == BasisStatus::kUpper && has_upper) return BasisStatus::kUpper;
    if (has_lower) return BasisStatus::kLower;
    if (has_upper) return BasisStatus::kUpper;
    return BasisStatus::kZero;
  }

  double nonbasic_value(int j) const {
    switch (status_[j]) {
      case BasisStatus::kLower:
        return lb_[j];
      case BasisStatus::kUpper:
        return ub_[j];
      default:
        return 0.0;
    }
  }

  void load_cold() {
    status_.assign(total_, BasisStatus::kLower);
    for (int j = 0; j < n_; ++j) {
      status_[j] = nonbasic_at(j, BasisStatus::kLower);
    }
    head_.resize(m_);
    for (int i = 0; i < m_; ++i) {
      status_[n_ + i] = BasisStatus::kBasic;
      head_[i] = n_ + i;
    }
  }

  bool load_warm(const LpBasis& warm) {
    if (warm.num_vars() != n_ || warm.num_rows() != m_) return false;
    const auto given = warm.status();
    if (std::count(given.begin(), given.end(), BasisStatus::kBasic) != m_) {
      return false;
    }
    status_.assign(given.begin(), given.end());
    head_.clear();
    for (int j = 0; j < total_; ++j) {
      if (status_[j] == BasisStatus::kBasic) {
        head_.push_back(j);
      } else {
        status_[j] = nonbasic_at(j, status_[j]);
      }
    }
    return true;
  }

  bool factor() {
    if (m_ == 0) {
      binv_.resize(0, 0);
      return true;
    }
    Eigen::MatrixXd basis(m_, m_);
    Eigen::VectorXd column(m_);
    for (int r = 0; r < m_; ++r) {
      load_column(head_[r], column);
      basis.col(r) = column;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(basis);
    lu.setThreshold(1e-11);
    if (!lu.isInvertible()) return false;
    binv_ = lu.inverse();
    return true;
  }

  void compute_basic_values() {
    x_.assign(total_, 0.0);
    Eigen::VectorXd residual = rhs_;
    for (int j = 0; j < total_; ++j) {
      if (status_[j] == BasisStatus::kBasic) continue;
      const double v = nonbasic_value(j);
      x_[j] = v;
      if (v == 0.0) continue;
      if (j >= n_) {
        residual[j - n_] -= v;
      } else {
        const double* col = dense_.data() + static_cast<std::size_t>(j) * m_;
        for (int i = 0; i < m_; ++i) residual[i] -= col[i] * v;
      }
    }
    const Eigen::VectorXd basic = binv_ * residual;
    for (int r = 0; r < m_; ++r) x_[head_[r]] = basic[r];
  }

  LpSolution finish(LpStatus status) {
    LpSolution sol;
    sol.status = status;
    sol.iterations = iterations_;
    if (status_.empty()) {
      // Empty domain detected before any basis was built.
      load_cold();
      x_.assign(total_, 0.0);
      for (int j = 0; j < n_; ++j) {
        x_[j] = std::isfinite(lb_[j]) ? lb_[j] : 0.0;
      }
      binv_ = Eigen::MatrixXd::Identity(m_, m_);
    }
    sol.x.assign(x_.begin(), x_.begin() + n_);
    for (int j = 0; j < n_; ++j) sol.objective += cost_[j] * sol.x[j];

    Eigen::VectorXd basic_cost(m_);
    for (int r = 0; r < m_; ++r) basic_cost[r] = cost_[head_[r]];
    const Eigen::VectorXd y = binv_.transpose() * basic_cost;
    sol.duals.assign(y.data(), y.data() + m_);
    sol.reduced_costs.assign(n_, 0.0);
    for (int j = 0; j < n_; ++j) {
      if (status_[j] != BasisStatus::kBasic) {
        sol.reduced_costs[j] = cost_[j] - column_dot(j, y);
      }
    }
    sol.basis_status.assign(status_.begin(), status_.begin() + n_);
    sol.is_tight.assign(m_, false);
    std::vector<double> activity(m_, 0.0);
    for (const Coefficient& e : instance_.entries()) {
      activity[e.row] += e.value * sol.x[e.col];
    }
    for (int i = 0; i < m_; ++i) {
      const double b = instance_.rhs()[i];
      sol.is_tight[i] =
          std::abs(activity[i] - b) <= kTightTol * std::max(1.0, std::abs(b));
    }
    sol.basis = LpBasis(n_, m_, status_);
    return sol;
  }

  const MilpInstance& instance_;
  const int n_;
  const int m_;
  const int total_;
  const bool trace_;
  std::int64_t max_iterations_ = 0;
  std::int64_t iterations_ = 0;

  std::vector<double> dense_;  // column-major m x n
  std::vector<double> cost_;
  std::vector<double> lb_;
  std::vector<double> ub_;
  Eigen::VectorXd rhs_;
  std::vector<BasisStatus> status_;
  std::vector<int> head_;
  std::vector<double> x_;
  Eigen::MatrixXd binv_;
};

}  // namespace

LpSolution solve_relaxation(const MilpInstance& instance,
                            const VarBounds* local, const LpBasis* warm,
                            const SimplexOptions& options) {
  VarBounds global;
  if (local == nullptr) {
    global = VarBounds::global(instance);
    local = &global;
  } else if (static_cast<int>(local->lower.size()) != instance.num_vars() ||
             static_cast<int>(local->upper.size()) != instance.num_vars()) {
    throw InvalidArgument("local bounds length does not match instance");
  }
  Simplex simplex(instance, *local, options);
  return simplex.run(warm);
}

LpSolution resolve_with_bound_change(const MilpInstance& instance,
                                     const VarBounds& base_bounds,
                                     const LpSolution& base, int var,
                                     BoundSide side, double value,
                                     const SimplexOptions& options) {
  if (var < 0 || var >= instance.num_vars()) {
    throw InvalidArgument("bound change on unknown variable");
  }
  const VarBounds child = with_bound_change(base_bounds, var, side, value);
  return solve_relaxation(instance, &child,
                          base.basis.empty() ? nullptr : &base.basis, options);
}

}  // namespace branchlab
