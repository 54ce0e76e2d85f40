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


// Imitation samples and their on-disk container.
//
// File layout (all integers and floats little-endian):
//   magic "BLABDSET", u32 version, u64 train count, u64 valid count,
//   u64 node visits, u64 expert visits, f64 time_limit, f64 p_sb,
//   u64 target, u64 seed, u64 config digest, u64 payload digest (FNV-1a 64
//   over every record byte), then one u64-length-prefixed record per sample,
//   train samples first.

#ifndef BRANCHLAB_DATASET_HPP_
#define BRANCHLAB_DATASET_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "branchlab/features.hpp"

namespace branchlab {

struct Provenance {
  std::string instance;
  int node_id = 0;
  std::uint64_t config_digest = 0;
  bool operator==(const Provenance&) const = default;
};

struct Sample {
  BipartiteState state;
  std::vector<int> candidates;
  int expert_action = 0;
  // Strong-branching score per candidate (empty when not recorded).
  std::vector<double> sb_scores;
  Provenance provenance;
  bool operator==(const Sample&) const = default;
};

struct CollectionMeta {
  double time_limit = 0.0;
  double p_sb = 0.0;
  std::uint64_t target = 0;
  std::uint64_t seed = 0;
  std::uint64_t config_digest = 0;
  std::uint64_t node_visits = 0;
  std::uint64_t expert_visits = 0;
  bool operator==(const CollectionMeta&) const = default;
};

struct Dataset {
  CollectionMeta meta;
  std::vector<Sample> train;
  std::vector<Sample> valid;
  std::size_t size() const { return train.size() + valid.size(); }
  bool operator==(const Dataset&) const = default;
};

inline constexpr std::uint32_t kDatasetVersion = 1;

std::string encode_dataset(const Dataset& dataset);
// Throws FormatError on bad magic, version, truncation or digest mismatch.
Dataset decode_dataset(const std::string& bytes);
void write_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset read_dataset(const std::filesystem::path& path);

std::uint64_t fnv1a64(const void* data, std::size_t size,
                      std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace branchlab

#endif  // BRANCHLAB_DATASET_HPP_
