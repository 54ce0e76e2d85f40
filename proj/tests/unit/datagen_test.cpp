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
#include <set>
#include <sstream>

#include "branchlab/datagen.hpp"
#include "branchlab/dataset.hpp"
#include "oracles.hpp"

namespace branchlab {
namespace {

std::vector<MilpInstance> cover_instances(int count, std::uint64_t first_seed,
                                          int rows = 30, int cols = 60) {
  std::vector<MilpInstance> out;
  for (int k = 0; k < count; ++k) {
    GeneratorConfig g;
    g.family = Family::kSetCover;
    g.rows = rows;
    g.cols = cols;
    g.density = 0.15;
    g.seed = first_seed + k;
    out.push_back(generate(g));
  }
  return out;
}

Dataset random_dataset(Rng& rng, int train, int valid) {
  Dataset d;
  d.meta = {60.0, 0.25, 1000, 7, 0xabcdef, 4000, 1000};
  for (int k = 0; k < train + valid; ++k) {
    Sample s;
    const int n = 1 + static_cast<int>(uniform_int(rng, 0, 8));
    s.state = testing::random_state(rng, 1 + static_cast<int>(uniform_int(rng, 0, 5)), n, 0.4);
    s.state.zero_objective_norm = k % 3 == 0;
    if (k % 4 == 0) s.state.zero_norm_rows = {0};
    for (int j = 0; j < n; ++j) {
      if (j == 0 || uniform01(rng) < 0.5) s.candidates.push_back(j);
    }
    s.expert_action = s.candidates.back();
    if (k % 2 == 0) {
      for (std::size_t c = 0; c < s.candidates.size(); ++c) s.sb_scores.push_back(uniform01(rng));
    }
    s.provenance = {"inst" + std::to_string(k % 7), k, 99};
    (k < train ? d.train : d.valid).push_back(std::move(s));
  }
  return d;
}

TEST(DatasetIo, EmptyRoundTrip) {
  const Dataset empty;
  EXPECT_EQ(decode_dataset(encode_dataset(empty)), empty);
}

TEST(DatasetIo, ThousandSamplesBitwise) {
  Rng rng(1);
  const Dataset d = random_dataset(rng, 990, 10);
  const std::string bytes = encode_dataset(d);
  const Dataset back = decode_dataset(bytes);
  EXPECT_EQ(back, d);
  EXPECT_EQ(encode_dataset(back), bytes);
  const auto path = std::filesystem::temp_directory_path() / "branchlab_ds_test.bin";
  write_dataset(d, path);
  EXPECT_EQ(read_dataset(path), d);
  std::filesystem::remove(path);
}

TEST(DatasetIo, CorruptionIsDetected) {
  Rng rng(2);
  const std::string bytes = encode_dataset(random_dataset(rng, 20, 2));
  std::string bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(decode_dataset(bad), FormatError);
  bad = bytes;
  bad[8] = 2;  // version
  EXPECT_THROW(decode_dataset(bad), FormatError);
  bad = bytes;
  bad[bad.size() - 5] ^= 0x40;  // payload byte
  EXPECT_THROW(decode_dataset(bad), FormatError);
  EXPECT_THROW(decode_dataset(bytes.substr(0, bytes.size() - 1)), FormatError);
  EXPECT_THROW(decode_dataset(bytes.substr(0, 30)), FormatError);
  EXPECT_THROW(read_dataset("/nonexistent/branchlab.bin"), Error);
}

TEST(Collect, ProbabilityOneRecordsEveryNode) {
  const auto instances = cover_instances(40, 500);
  CollectionConfig cfg;
  cfg.time_limit = 60.0;
  cfg.p_sb = 1.0;
  cfg.target_samples = 100000;
  std::ostringstream trace;
  cfg.trace = &trace;
  const Dataset d = collect(instances, cfg);
  EXPECT_EQ(d.meta.node_visits, d.meta.expert_visits);
  EXPECT_EQ(d.size(), d.meta.expert_visits);
  std::istringstream lines(trace.str());
  std::string line;
  std::uint64_t count = 0;
  while (std::getline(lines, line)) {
    EXPECT_NE(line.find("\"expert\":true"), std::string::npos);
    ++count;
  }
  EXPECT_EQ(count, d.meta.node_visits);
}

TEST(Collect, SamplesAreConsistent) {
  const auto instances = cover_instances(30, 700);
  CollectionConfig cfg;
  cfg.p_sb = 0.7;
  cfg.target_samples = 60;
  cfg.seed = 3;
  const Dataset d = collect(instances, cfg);
  EXPECT_LE(d.size(), 60u);
  EXPECT_GE(d.valid.size(), 1u);
  std::set<std::pair<std::string, int>> seen;
  for (const auto* split : {&d.train, &d.valid}) {
    for (const Sample& s : *split) {
      ASSERT_EQ(s.sb_scores.size(), s.candidates.size());
      const auto best = std::max_element(s.sb_scores.begin(), s.sb_scores.end());
      EXPECT_EQ(s.candidates[best - s.sb_scores.begin()], s.expert_action);
      EXPECT_NE(std::find(s.candidates.begin(), s.candidates.end(), s.expert_action),
                s.candidates.end());
      EXPECT_EQ(s.provenance.config_digest, cfg.digest());
      EXPECT_EQ(s.state.num_vars, 60);
    }
  }
}

TEST(Collect, DeterministicBytes) {
  const auto instances = cover_instances(20, 800);
  CollectionConfig cfg;
  cfg.p_sb = 0.5;
  cfg.target_samples = 50;
  cfg.seed = 9;
  const std::string a = encode_dataset(collect(instances, cfg));
  cfg.mode = ExecMode::kSerial;
  EXPECT_EQ(encode_dataset(collect(instances, cfg)), a);
  cfg.seed = 10;
  EXPECT_NE(encode_dataset(collect(instances, cfg)), a);
}

TEST(Collect, Errors) {
  const auto instances = cover_instances(3, 900);
  CollectionConfig cfg;
  cfg.p_sb = 0.0;
  EXPECT_THROW(collect(instances, cfg), Error);
  cfg.p_sb = 1.5;
  EXPECT_THROW(collect(instances, cfg), InvalidArgument);
  cfg.p_sb = 1.0;
  cfg.target_samples = 0;
  EXPECT_THROW(collect(instances, cfg), InvalidArgument);
  cfg.target_samples = 10;
  EXPECT_THROW(collect({}, cfg), InvalidArgument);
  // A single instance whose root LP is integral yields nothing to record.
  MilpData data;
  data.name = "integral_root";
  data.c = {1.0, 1.0};
  data.lower = {0.0, 0.0};
  data.upper = {1.0, 1.0};
  data.integer = {true, true};
  data.entries = {{0, 0, -1.0}};
  data.b = {-1.0};
  EXPECT_THROW(collect({MilpInstance(std::move(data))}, cfg), Error);
}

// Sort-based recomputation of the rank used by top-k.
std::size_t sorted_rank(const std::vector<double>& z, std::vector<int> cands, int action) {
  std::sort(cands.begin(), cands.end(), [&](int a, int b) {
    return z[a] != z[b] ? z[a] > z[b] : a < b;
  });
  return static_cast<std::size_t>(std::find(cands.begin(), cands.end(), action) - cands.begin());
}

TEST(TopK, RankMatchesSortOracle) {
  Rng rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(uniform_int(rng, 0, 20));
    std::vector<double> z(n);
    // Coarse values force ties.
    for (double& v : z) v = static_cast<double>(uniform_int(rng, -3, 3));
    std::vector<int> cands;
    for (int j = 0; j < n; ++j) {
      if (uniform01(rng) < 0.6) cands.push_back(j);
    }
    if (cands.empty()) cands.push_back(0);
    const int action = cands[uniform_int(rng, 0, static_cast<std::int64_t>(cands.size()) - 1)];
    EXPECT_EQ(candidate_rank(z, cands, action), sorted_rank(z, cands, action));
  }
}

TEST(TopK, ExhaustiveKAndZeroModel) {
  Rng rng(6);
  const Dataset d = random_dataset(rng, 200, 0);
  GcnnParams p = init_params({4}, 1);
  std::size_t max_cands = 0;
  for (const Sample& s : d.train) max_cands = std::max(max_cands, s.candidates.size());
  const auto acc = top_k_accuracy(p, d.train, {static_cast<int>(max_cands), 100});
  EXPECT_EQ(acc[0], 100.0);
  EXPECT_EQ(acc[1], 100.0);
  // All-zero logits rank by index: top-1 hits exactly when the expert is the
  // lowest candidate.
  for (double& v : p.tensor(kHead2W)) v = 0.0;
  std::size_t lowest = 0;
  for (const Sample& s : d.train) lowest += s.expert_action == s.candidates.front();
  EXPECT_DOUBLE_EQ(top_k_accuracy(p, d.train, {1})[0], 100.0 * lowest / d.train.size());
  EXPECT_THROW(top_k_accuracy(p, {}, {1}), InvalidArgument);
}

TEST(TopK, RandomLogitsNearUniformRate) {
  // Five candidates, expert uniformly placed, random network weights per
  // sample group: top-1 should sit near 20%.
  Rng rng(7);
  std::vector<Sample> samples;
  for (int k = 0; k < 5000; ++k) {
    Sample s;
    s.state = testing::random_state(rng, 3, 5, 0.5);
    s.candidates = {0, 1, 2, 3, 4};
    s.expert_action = static_cast<int>(uniform_int(rng, 0, 4));
    samples.push_back(std::move(s));
  }
  const auto acc = top_k_accuracy(init_params({4}, 3), samples, {1, 5});
  EXPECT_NEAR(acc[0], 20.0, 3.0);
  EXPECT_EQ(acc[1], 100.0);
}

}  // namespace
}  // namespace branchlab
