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
#include <cstdio>
#include <numeric>
#include <optional>

#include "branchlab/milp.hpp"
#include "branchlab/rng.hpp"

namespace branchlab {

namespace {

constexpr int kMaxAttempts = 64;

// rows x cols incidence pattern drawn entry-wise with probability `density`,
// then repaired so every row and every column has at least `min_row` /
// one entry.
std::vector<std::vector<int>> draw_pattern(Rng& rng, int rows, int cols,
                                           double density, int min_row) {
  std::vector<std::vector<int>> pattern(rows);
  std::vector<int> col_count(cols, 0);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      if (uniform01(rng) < density) {
        pattern[i].push_back(j);
        ++col_count[j];
      }
    }
  }
  for (int i = 0; i < rows; ++i) {
    while (static_cast<int>(pattern[i].size()) < std::min(min_row, cols)) {
      const int j = static_cast<int>(uniform_int(rng, 0, cols - 1));
      if (std::find(pattern[i].begin(), pattern[i].end(), j) ==
          pattern[i].end()) {
        pattern[i].push_back(j);
        ++col_count[j];
      }
    }
  }
  for (int j = 0; j < cols; ++j) {
    if (col_count[j] == 0) {
      const int i = static_cast<int>(uniform_int(rng, 0, rows - 1));
      pattern[i].push_back(j);
      ++col_count[j];
    }
  }
  for (auto& row : pattern) std::sort(row.begin(), row.end());
  return pattern;
}

RawModel binary_model(int n) {
  RawModel model;
  model.c.assign(n, 0.0);
  model.lower.assign(n, 0.0);
  model.upper.assign(n, 1.0);
  model.integer.assign(n, true);
  for (int j = 0; j < n; ++j) model.var_names.push_back("x" + std::to_string(j));
  return model;
}

// Minimum-cost cover: every row must be hit by a chosen column.
std::pair<RawModel, std::vector<double>> set_cover(const GeneratorConfig& cfg,
                                                   Rng& rng) {
  const auto pattern = draw_pattern(rng, cfg.rows, cfg.cols, cfg.density, 1);
  RawModel model = binary_model(cfg.cols);
  for (int j = 0; j < cfg.cols; ++j) {
    model.c[j] = static_cast<double>(uniform_int(rng, 1, 100));
  }
  for (int i = 0; i < cfg.rows; ++i) {
    RawRow row;
    row.name = "cover" + std::to_string(i);
    row.sense = RowSense::kGe;
    row.rhs = 1.0;
    for (int j : pattern[i]) row.terms.emplace_back(j, 1.0);
    model.rows.push_back(std::move(row));
  }
  return {std::move(model), std::vector<double>(cfg.cols, 1.0)};
}

// Multi-dimensional knapsack with weakly correlated profits, as a
// minimization of negated profit.
std::pair<RawModel, std::vector<double>> multiknapsack(
    const GeneratorConfig& cfg, Rng& rng) {
  const auto pattern = draw_pattern(rng, cfg.rows, cfg.cols, cfg.density, 1);
  RawModel model = binary_model(cfg.cols);
  std::vector<double> weight_sum(cfg.cols, 0.0);
  std::vector<int> appearances(cfg.cols, 0);
  for (int i = 0; i < cfg.rows; ++i) {
    RawRow row;
    row.name = "knap" + std::to_string(i);
    row.sense = RowSense::kLe;
    double total = 0.0;
    for (int j : pattern[i]) {
      const double w = static_cast<double>(uniform_int(rng, 1, 100));
      row.terms.emplace_back(j, w);
      total += w;
      weight_sum[j] += w;
      ++appearances[j];
    }
    row.rhs = std::max(1.0, std::floor(0.5 * total));
    model.rows.push_back(std::move(row));
  }
  for (int j = 0; j < cfg.cols; ++j) {
    const double avg = weight_sum[j] / appearances[j];
    const double profit =
        std::max(1.0, std::round(avg) + static_cast<double>(
                                            uniform_int(rng, -10, 10)));
    model.c[j] = -profit;
  }
  return {std::move(model), std::vector<double>(cfg.cols, 0.0)};
}

// Workloads apportioned over workers: binary y_w opens worker w, continuous
// x_kw in [0, 1/2] is the share of workload k on w (so every workload
// survives the loss of any single worker). Covering rows per workload,
// linked capacity rows per worker.
std::pair<RawModel, std::vector<double>> bin_pack_apportion(
    const GeneratorConfig& cfg, Rng& rng) {
  const int workloads = cfg.rows;
  const int workers = cfg.cols;
  if (workers < 2) {
    throw InvalidArgument("bin_pack_apportion needs at least two workers");
  }
  const auto pattern = draw_pattern(rng, workloads, workers, cfg.density, 2);
  std::vector<double> demand(workloads);
  for (double& d : demand) d = static_cast<double>(uniform_int(rng, 5, 30));
  // Capacity is sized from the even-split load plus a random 10-50% margin,
  // so the even split certifies feasibility.
  std::vector<double> even_load(workers, 0.0);
  for (int k = 0; k < workloads; ++k) {
    for (int w : pattern[k]) {
      even_load[w] += demand[k] / static_cast<double>(pattern[k].size());
    }
  }

  RawModel model;
  for (int w = 0; w < workers; ++w) {
    model.var_names.push_back("open" + std::to_string(w));
    model.c.push_back(static_cast<double>(uniform_int(rng, 10, 15)));
    model.lower.push_back(0.0);
    model.upper.push_back(1.0);
    model.integer.push_back(true);
  }
  std::vector<RawRow> capacity_rows(workers);
  for (int w = 0; w < workers; ++w) {
    capacity_rows[w].name = "cap" + std::to_string(w);
    capacity_rows[w].sense = RowSense::kLe;
    capacity_rows[w].rhs = 0.0;
    const double margin = 1.1 + 0.1 * static_cast<double>(uniform_int(rng, 0, 4));
    capacity_rows[w].terms.emplace_back(w, -std::ceil(margin * even_load[w]));
  }
  std::vector<double> certificate(workers, 1.0);
  for (int k = 0; k < workloads; ++k) {
    RawRow cover;
    cover.name = "load" + std::to_string(k);
    cover.sense = RowSense::kGe;
    cover.rhs = 1.0;
    const double share = 1.0 / static_cast<double>(pattern[k].size());
    for (int w : pattern[k]) {
      const int col = static_cast<int>(model.c.size());
      model.var_names.push_back("share" + std::to_string(k) + "_" +
                                std::to_string(w));
      model.c.push_back(0.0);
      model.lower.push_back(0.0);
      model.upper.push_back(0.5);
      model.integer.push_back(false);
      cover.terms.emplace_back(col, 1.0);
      capacity_rows[w].terms.emplace_back(col, demand[k]);
      certificate.push_back(share);
    }
    model.rows.push_back(std::move(cover));
  }
  for (auto& row : capacity_rows) model.rows.push_back(std::move(row));
  return {std::move(model), std::move(certificate)};
}

void validate(const GeneratorConfig& cfg) {
  if (cfg.rows < 1 || cfg.cols < 1) {
    throw InvalidArgument("generator needs positive rows and cols");
  }
  if (!(cfg.density > 0.0 && cfg.density <= 1.0)) {
    throw InvalidArgument("density must lie in (0, 1]");
  }
  if (cfg.density * cfg.rows * cfg.cols < cfg.cols) {
    throw InvalidArgument("density * rows * cols must be at least cols");
  }
}

std::string density_tag(double density) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", density);
  return buf;
}

}  // namespace

MilpInstance generate(const GeneratorConfig& cfg) {
  validate(cfg);
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const std::uint64_t seed =
        attempt == 0 ? cfg.seed : mix_seed(cfg.seed, attempt);
    Rng rng(seed);
    std::pair<RawModel, std::vector<double>> drawn;
    switch (cfg.family) {
      case Family::kSetCover:
        drawn = set_cover(cfg, rng);
        break;
      case Family::kMultiKnapsack:
        drawn = multiknapsack(cfg, rng);
        break;
      case Family::kBinPackApportion:
        drawn = bin_pack_apportion(cfg, rng);
        break;
    }
    RawModel& model = drawn.first;
    model.name = to_string(cfg.family) + "_r" + std::to_string(cfg.rows) +
                 "_c" + std::to_string(cfg.cols) + "_s" +
                 std::to_string(cfg.seed);
    model.metadata["family"] = to_string(cfg.family);
    model.metadata["rows"] = std::to_string(cfg.rows);
    model.metadata["cols"] = std::to_string(cfg.cols);
    model.metadata["density"] = density_tag(cfg.density);
    model.metadata["seed"] = std::to_string(cfg.seed);
    if (attempt > 0) {
      model.metadata["regenerated_attempts"] = std::to_string(attempt);
      model.metadata["effective_seed"] = std::to_string(seed);
    }
    MilpInstance instance = normalize(model);
    if (evaluate_solution(instance, drawn.second).feasible) return instance;
  }
  throw Error("generator could not produce a certified-feasible instance");
}

}  // namespace branchlab
