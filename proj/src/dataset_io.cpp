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
#include <cstring>

#include "binary_io.hpp"
#include "branchlab/dataset.hpp"

namespace branchlab {

namespace {

constexpr char kMagic[8] = {'B', 'L', 'A', 'B', 'D', 'S', 'E', 'T'};
// Header bytes after the magic: version + 4 u64 + 2 f64 + 4 u64.
constexpr std::size_t kHeaderSize = 8 + 4 + 10 * 8;

template <typename T>
void put_vector(binio::Writer& w, const std::vector<T>& v) {
  w.put<std::uint64_t>(v.size());
  w.put_array(v.data(), v.size());
}

template <typename T>
std::vector<T> get_vector(binio::Reader& r) {
  const auto size = r.get<std::uint64_t>();
  r.need(size > UINT64_MAX / sizeof(T) ? UINT64_MAX : size * sizeof(T));
  std::vector<T> v(size);
  r.get_array(v.data(), v.size());
  return v;
}

std::string encode_sample(const Sample& s) {
  binio::Writer w;
  w.put_bytes(s.provenance.instance);
  w.put<std::int32_t>(s.provenance.node_id);
  w.put<std::uint64_t>(s.provenance.config_digest);
  const BipartiteState& st = s.state;
  w.put<std::int32_t>(st.num_rows);
  w.put<std::int32_t>(st.num_vars);
  w.put<std::uint8_t>(st.zero_objective_norm ? 1 : 0);
  put_vector(w, st.zero_norm_rows);
  put_vector(w, st.cons);
  put_vector(w, st.edge_row);
  put_vector(w, st.edge_col);
  put_vector(w, st.edge_val);
  put_vector(w, st.vars);
  put_vector(w, s.candidates);
  w.put<std::int32_t>(s.expert_action);
  put_vector(w, s.sb_scores);
  return std::move(w.bytes());
}

Sample decode_sample(const std::string& bytes, std::size_t pos, std::size_t end) {
  binio::Reader r(bytes, pos, end);
  Sample s;
  s.provenance.instance = r.get_bytes();
  s.provenance.node_id = r.get<std::int32_t>();
  s.provenance.config_digest = r.get<std::uint64_t>();
  BipartiteState& st = s.state;
  st.num_rows = r.get<std::int32_t>();
  st.num_vars = r.get<std::int32_t>();
  st.zero_objective_norm = r.get<std::uint8_t>() != 0;
  st.zero_norm_rows = get_vector<int>(r);
  st.cons = get_vector<double>(r);
  st.edge_row = get_vector<int>(r);
  st.edge_col = get_vector<int>(r);
  st.edge_val = get_vector<double>(r);
  st.vars = get_vector<double>(r);
  s.candidates = get_vector<int>(r);
  s.expert_action = r.get<std::int32_t>();
  s.sb_scores = get_vector<double>(r);
  if (!r.done()) throw FormatError("sample record has trailing bytes");

  const bool shapes_ok =
      st.num_rows >= 0 && st.num_vars >= 0 &&
      st.cons.size() == static_cast<std::size_t>(st.num_rows) * kConsFeatures &&
      st.vars.size() == static_cast<std::size_t>(st.num_vars) * kVarFeatures &&
      st.edge_row.size() == st.edge_val.size() &&
      st.edge_col.size() == st.edge_val.size() &&
      (s.sb_scores.empty() || s.sb_scores.size() == s.candidates.size());
  if (!shapes_ok) throw FormatError("sample tensors have inconsistent shapes");
  for (std::size_t k = 0; k < st.num_edges(); ++k) {
    if (st.edge_row[k] < 0 || st.edge_row[k] >= st.num_rows ||
        st.edge_col[k] < 0 || st.edge_col[k] >= st.num_vars) {
      throw FormatError("sample edge out of range");
    }
  }
  for (int j : s.candidates) {
    if (j < 0 || j >= st.num_vars) throw FormatError("sample candidate out of range");
  }
  if (std::find(s.candidates.begin(), s.candidates.end(), s.expert_action) ==
      s.candidates.end()) {
    throw FormatError("sample expert action is not a candidate");
  }
  return s;
}

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t hash = seed;
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= p[i];
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string encode_dataset(const Dataset& dataset) {
  std::string payload;
  for (const auto* split : {&dataset.train, &dataset.valid}) {
    for (const Sample& s : *split) {
      const std::string rec = encode_sample(s);
      const std::uint64_t size = rec.size();
      payload.append(reinterpret_cast<const char*>(&size), sizeof(size));
      payload += rec;
    }
  }
  const CollectionMeta& m = dataset.meta;
  binio::Writer w;
  w.put_array(kMagic, 8);
  w.put<std::uint32_t>(kDatasetVersion);
  w.put<std::uint64_t>(dataset.train.size());
  w.put<std::uint64_t>(dataset.valid.size());
  w.put<std::uint64_t>(m.node_visits);
  w.put<std::uint64_t>(m.expert_visits);
  w.put<double>(m.time_limit);
  w.put<double>(m.p_sb);
  w.put<std::uint64_t>(m.target);
  w.put<std::uint64_t>(m.seed);
  w.put<std::uint64_t>(m.config_digest);
  w.put<std::uint64_t>(fnv1a64(payload.data(), payload.size()));
  w.bytes() += payload;
  return std::move(w.bytes());
}

Dataset decode_dataset(const std::string& bytes) {
  binio::Reader r(bytes);
  char magic[8];
  r.get_array(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0) {
    throw FormatError("not a dataset file (bad magic)");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kDatasetVersion) {
    throw FormatError("unsupported dataset version " + std::to_string(version));
  }
  Dataset d;
  const auto n_train = r.get<std::uint64_t>();
  const auto n_valid = r.get<std::uint64_t>();
  d.meta.node_visits = r.get<std::uint64_t>();
  d.meta.expert_visits = r.get<std::uint64_t>();
  d.meta.time_limit = r.get<double>();
  d.meta.p_sb = r.get<double>();
  d.meta.target = r.get<std::uint64_t>();
  d.meta.seed = r.get<std::uint64_t>();
  d.meta.config_digest = r.get<std::uint64_t>();
  const auto digest = r.get<std::uint64_t>();
  if (r.pos() != kHeaderSize) throw FormatError("bad dataset header");
  if (fnv1a64(bytes.data() + kHeaderSize, bytes.size() - kHeaderSize) != digest) {
    throw FormatError("dataset payload digest mismatch");
  }
  if (n_train > bytes.size() || n_valid > bytes.size()) {
    throw FormatError("implausible sample counts");
  }
  for (std::uint64_t k = 0; k < n_train + n_valid; ++k) {
    const auto size = r.get<std::uint64_t>();
    r.need(size);
    Sample s = decode_sample(bytes, r.pos(), r.pos() + size);
    (k < n_train ? d.train : d.valid).push_back(std::move(s));
    r.skip(size);
  }
  if (!r.done()) throw FormatError("trailing bytes after dataset records");
  return d;
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  binio::write_file(path, encode_dataset(dataset));
}

Dataset read_dataset(const std::filesystem::path& path) {
  return decode_dataset(binio::read_file(path));
}

}  // namespace branchlab
