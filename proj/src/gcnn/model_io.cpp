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


#include <cstring>

#include "binary_io.hpp"
#include "branchlab/gcnn.hpp"

namespace branchlab {

namespace {
constexpr char kMagic[8] = {'B', 'L', 'A', 'B', 'G', 'C', 'N', 'N'};

template <std::size_t F>
void put_stats(binio::Writer& w, const std::array<double, F>& a) {
  w.put_array(a.data(), F);
}

template <std::size_t F>
void get_stats(binio::Reader& r, std::array<double, F>& a) {
  r.get_array(a.data(), F);
}
}  // namespace

std::string encode_model(const GcnnParams& params) {
  const auto layout = gcnn_layout(params.h);
  if (params.values.size() != layout.back().offset + layout.back().size()) {
    throw InvalidArgument("parameter vector does not match the layer inventory");
  }
  binio::Writer w;
  w.put_array(kMagic, 8);
  w.put<std::uint32_t>(kModelVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(params.h));
  w.put<std::uint32_t>(kConsFeatures);
  w.put<std::uint32_t>(kEdgeFeatures);
  w.put<std::uint32_t>(kVarFeatures);
  const Prenorm& p = params.prenorm;
  put_stats(w, p.cons_shift);
  put_stats(w, p.cons_scale);
  put_stats(w, p.edge_shift);
  put_stats(w, p.edge_scale);
  put_stats(w, p.var_shift);
  put_stats(w, p.var_scale);
  w.put_array(params.values.data(), params.values.size());
  return std::move(w.bytes());
}

GcnnParams decode_model(const std::string& bytes) {
  binio::Reader r(bytes);
  char magic[8];
  r.get_array(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0) throw FormatError("not a model file");
  const auto version = r.get<std::uint32_t>();
  if (version != kModelVersion) {
    throw FormatError("unsupported model version " + std::to_string(version));
  }
  GcnnParams params;
  const auto h = r.get<std::uint32_t>();
  if (h < 1 || h > 4096) throw FormatError("bad embedding size");
  params.h = static_cast<int>(h);
  if (r.get<std::uint32_t>() != kConsFeatures ||
      r.get<std::uint32_t>() != kEdgeFeatures ||
      r.get<std::uint32_t>() != kVarFeatures) {
    throw FormatError("feature dimensions do not match");
  }
  Prenorm& p = params.prenorm;
  get_stats(r, p.cons_shift);
  get_stats(r, p.cons_scale);
  get_stats(r, p.edge_shift);
  get_stats(r, p.edge_scale);
  get_stats(r, p.var_shift);
  get_stats(r, p.var_scale);
  params.values.resize(static_cast<std::size_t>(param_count({params.h})));
  r.get_array(params.values.data(), params.values.size());
  if (!r.done()) throw FormatError("trailing bytes after model tensors");
  return params;
}

void save_model(const GcnnParams& params, const std::filesystem::path& path) {
  binio::write_file(path, encode_model(params));
}

GcnnParams load_model(const std::filesystem::path& path) {
  return decode_model(binio::read_file(path));
}

}  // namespace branchlab
