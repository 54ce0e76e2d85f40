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


// Serial reference vs OpenMP kernels: GCNN forward, strong-branching
// candidate scoring and episodes across instances.

#include <benchmark/benchmark.h>

#include "branchlab/bnb.hpp"
#include "branchlab/eval.hpp"
#include "branchlab/features.hpp"
#include "branchlab/gcnn.hpp"
#include "branchlab/policies.hpp"
#include "branchlab/simplex.hpp"

namespace branchlab {
namespace {

MilpInstance cover(int rows, int cols, std::uint64_t seed) {
  return generate({Family::kSetCover, rows, cols, 0.05, seed});
}

// Root state of a set_cover instance with a fractional LP.
const BipartiteState& root_state() {
  static const BipartiteState state = [] {
    for (std::uint64_t seed = 0;; ++seed) {
      const MilpInstance inst = cover(250, 500, seed);
      EpisodeConfig cfg;
      cfg.clock = ClockMode::kVirtual;
      Episode ep(inst, cfg);
      const StepResult r = ep.reset();
      if (const auto* obs = std::get_if<Observation>(&r)) return obs->state;
    }
  }();
  return state;
}

void BM_Forward(benchmark::State& st) {
  const int h = static_cast<int>(st.range(0));
  const auto mode = st.range(1) ? ExecMode::kParallel : ExecMode::kSerial;
  const GcnnParams params = init_params({h}, 1);
  const BipartiteState& s = root_state();
  for (auto _ : st) benchmark::DoNotOptimize(forward(s, params, mode));
  st.SetLabel(mode == ExecMode::kParallel ? "parallel" : "serial");
}
BENCHMARK(BM_Forward)->ArgsProduct({{8, 64}, {0, 1}})->Unit(benchmark::kMicrosecond);

void BM_StrongBranching(benchmark::State& st) {
  const auto mode = st.range(0) ? ExecMode::kParallel : ExecMode::kSerial;
  static const MilpInstance inst = cover(60, 120, 7);
  static const VarBounds bounds = VarBounds::global(inst);
  static const LpSolution lp = solve_relaxation(inst);
  static const std::vector<int> cands = candidates(inst, lp.x);
  StrongBranchingOptions opts;
  opts.mode = mode;
  for (auto _ : st) {
    benchmark::DoNotOptimize(strong_branching_scores(inst, bounds, lp, cands, opts));
  }
  st.SetLabel(std::to_string(cands.size()) + " candidates, " +
              (mode == ExecMode::kParallel ? "parallel" : "serial"));
}
BENCHMARK(BM_StrongBranching)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Episodes(benchmark::State& st) {
  static const std::vector<MilpInstance> instances = [] {
    std::vector<MilpInstance> out;
    for (int k = 0; k < 16; ++k) out.push_back(generate({Family::kSetCover, 30, 60, 0.15, 100u + k}));
    return out;
  }();
  EvalConfig cfg;
  cfg.policy = "pc";
  cfg.time_limit = 60.0;
  cfg.clock = ClockMode::kVirtual;
  cfg.mode = st.range(0) ? ExecMode::kParallel : ExecMode::kSerial;
  for (auto _ : st) benchmark::DoNotOptimize(evaluate(instances, cfg));
  st.SetLabel(st.range(0) ? "parallel" : "serial");
}
BENCHMARK(BM_Episodes)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace branchlab

BENCHMARK_MAIN();
