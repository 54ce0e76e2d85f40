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

// Mixed-integer linear programs in the canonical form
//
//   min c'x  s.t.  A x <= b,  l <= x <= u,  x_j integer for j in I.
//
// Every row is stored as a <= row. Greater-or-equal rows are negated and
// equality rows are split into a <= pair when a model is normalized.

#ifndef BRANCHLAB_MILP_HPP_
#define BRANCHLAB_MILP_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "branchlab/common.hpp"

namespace branchlab {

struct Coefficient {
  int row = 0;
  int col = 0;
  double value = 0.0;
  bool operator==(const Coefficient&) const = default;
};

// Plain field bundle; MilpInstance validates and freezes it.
struct MilpData {
  std::string name = "milp";
  // -1 when the source document maximized; `c` is already negated then.
  double objective_sign = 1.0;
  std::vector<double> c;
  // Row-major coordinate list. Sorted by (row, col) on construction.
  std::vector<Coefficient> entries;
  std::vector<double> b;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<bool> integer;
  std::vector<std::string> var_names;
  std::vector<std::string> row_names;
  std::map<std::string, std::string> metadata;

  bool operator==(const MilpData&) const = default;
};

// Immutable after construction; safe to share between threads.
class MilpInstance {
 public:
  // Throws InvalidArgument when an invariant is violated. Missing names are
  // filled in as x<j> / r<i>.
  explicit MilpInstance(MilpData data);

  const std::string& name() const { return data_.name; }
  int num_vars() const { return static_cast<int>(data_.c.size()); }
  int num_rows() const { return static_cast<int>(data_.b.size()); }
  int num_integer() const { return num_integer_; }
  std::size_t num_nonzeros() const { return data_.entries.size(); }
  double objective_sign() const { return data_.objective_sign; }

  std::span<const double> objective() const { return data_.c; }
  std::span<const double> rhs() const { return data_.b; }
  std::span<const double> lower() const { return data_.lower; }
  std::span<const double> upper() const { return data_.upper; }
  std::span<const Coefficient> entries() const { return data_.entries; }
  std::span<const Coefficient> row(int i) const {
    return std::span<const Coefficient>(data_.entries)
        .subspan(row_start_[i], row_start_[i + 1] - row_start_[i]);
  }
  bool is_integer(int j) const { return data_.integer[j]; }
  // Integer with global bounds exactly [0, 1].
  bool is_binary(int j) const {
    return data_.integer[j] && data_.lower[j] == 0.0 && data_.upper[j] == 1.0;
  }
  const std::string& var_name(int j) const { return data_.var_names[j]; }
  const std::string& row_name(int i) const { return data_.row_names[i]; }
  const std::map<std::string, std::string>& metadata() const {
    return data_.metadata;
  }
  const MilpData& data() const { return data_; }

  bool operator==(const MilpInstance& other) const {
    return data_ == other.data_;
  }

 private:
  MilpData data_;
  std::vector<std::size_t> row_start_;
  int num_integer_ = 0;
};

// ---------------------------------------------------------------------------
// General-sense models and normalization.

enum class RowSense { kLe, kGe, kEq };

struct RawRow {
  std::string name;
  RowSense sense = RowSense::kLe;
  std::vector<std::pair<int, double>> terms;  // (column, coefficient)
  double rhs = 0.0;
};

struct RawModel {
  std::string name = "milp";
  bool maximize = false;
  std::vector<double> c;
  std::vector<RawRow> rows;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<bool> integer;
  std::vector<std::string> var_names;
  std::map<std::string, std::string> metadata;
};

// >= rows are negated, = rows become "<name>_le" / "<name>_ge", maximization
// is turned into minimization with objective_sign = -1. Zero terms dropped.
MilpInstance normalize(const RawModel& model);

// Inverse view of an instance; normalize(to_raw(x)) == x.
RawModel to_raw(const MilpInstance& instance);

// ---------------------------------------------------------------------------
// Text formats.

// Native format:
//
//   milp <name> min|max
//   meta <key> <value>           (optional, any number)
//   var <name> <lb|-inf> <ub|+inf> <int|cont>
//   obj                          (optional block)
//     <coef> <var>
//   row <name> <=|>=|= <rhs>
//     <coef> <var>
//   end
//
// Blank lines and lines starting with '#' are ignored.
MilpInstance parse_instance(std::string_view text);

// Always emits <= rows; coefficients use 17 significant digits.
std::string serialize_instance(const MilpInstance& instance);

// Whitespace-separated MPS subset: NAME, ROWS, COLUMNS (with INTORG/INTEND
// markers), RHS, BOUNDS, ENDATA. RANGES is rejected.
MilpInstance parse_mps(std::string_view text);

// Dispatches on extension: ".mps" is MPS, everything else native.
MilpInstance load_instance(const std::filesystem::path& path);
void save_instance(const MilpInstance& instance,
                   const std::filesystem::path& path);

// Files under `path` (sorted by name) or the single file itself.
std::vector<std::filesystem::path> list_instance_files(
    const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Generators.

enum class Family { kSetCover, kMultiKnapsack, kBinPackApportion };

std::string to_string(Family family);
Family family_from_string(std::string_view name);

// For kBinPackApportion `rows` is the number of workloads and `cols` the
// number of workers; density is the fraction of allowed (workload, worker)
// pairs. The other families map rows/cols to constraint/variable counts.
struct GeneratorConfig {
  Family family = Family::kSetCover;
  int rows = 10;
  int cols = 20;
  double density = 0.2;
  std::uint64_t seed = 0;
};

// Deterministic per config. When the repaired draw fails its feasibility
// certificate the seed is perturbed and the attempt is recorded in the
// instance metadata ("regenerated_attempts", "effective_seed").
MilpInstance generate(const GeneratorConfig& config);

// ---------------------------------------------------------------------------
// Solutions.

struct Solution {
  std::vector<double> x;
  double objective = 0.0;
  bool feasible = false;
  double max_violation = 0.0;
  double integrality_residual = 0.0;
};

// Throws InvalidArgument on length mismatch or non-finite entries.
Solution evaluate_solution(const MilpInstance& instance,
                           std::span<const double> x);

}  // namespace branchlab

#endif  // BRANCHLAB_MILP_HPP_
