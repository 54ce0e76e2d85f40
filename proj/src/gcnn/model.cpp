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
#include <chrono>
#include <cmath>

#include "branchlab/gcnn.hpp"
#include "branchlab/rng.hpp"
#include "gcnn/kernels.hpp"

namespace branchlab {

std::vector<TensorInfo> gcnn_layout(int h) {
  if (h < 1) throw InvalidArgument("embedding size must be positive");
  struct Shape {
    const char* name;
    int rows, cols;
  };
  const Shape shapes[kNumGcnnTensors] = {
      {"cons_embed1.W", h, kConsFeatures}, {"cons_embed1.b", h, 1},
      {"cons_embed2.W", h, h},             {"cons_embed2.b", h, 1},
      {"var_embed1.W", h, kVarFeatures},   {"var_embed1.b", h, 1},
      {"var_embed2.W", h, h},              {"var_embed2.b", h, 1},
      {"conv_vc.message.W", h, 2 * h + 1}, {"conv_vc.post.W", h, h},
      {"conv_vc.post.b", h, 1},            {"conv_vc.update1.W", h, 2 * h},
      {"conv_vc.update1.b", h, 1},         {"conv_vc.update2.W", h, h},
      {"conv_vc.update2.b", h, 1},         {"conv_cv.message.W", h, 2 * h + 1},
      {"conv_cv.post.W", h, h},            {"conv_cv.post.b", h, 1},
      {"conv_cv.update1.W", h, 2 * h},     {"conv_cv.update1.b", h, 1},
      {"conv_cv.update2.W", h, h},         {"conv_cv.update2.b", h, 1},
      {"head1.W", h, h},                   {"head1.b", h, 1},
      {"head2.W", 1, h},
  };
  std::vector<TensorInfo> layout;
  std::size_t offset = 0;
  for (const Shape& s : shapes) {
    layout.push_back({s.name, s.rows, s.cols, offset});
    offset += layout.back().size();
  }
  return layout;
}

std::int64_t param_count(const GcnnConfig& config) {
  const auto layout = gcnn_layout(config.h);
  return static_cast<std::int64_t>(layout.back().offset + layout.back().size());
}

Prenorm Prenorm::identity() {
  Prenorm p;
  p.cons_scale.fill(1.0);
  p.edge_scale.fill(1.0);
  p.var_scale.fill(1.0);
  return p;
}

namespace {

template <std::size_t F>
void fit_columns(const std::vector<std::pair<const double*, std::size_t>>& blocks,
                 std::array<double, F>& shift, std::array<double, F>& scale) {
  std::array<double, F> sum{}, sq{};
  std::size_t rows = 0;
  for (const auto& [data, count] : blocks) {
    for (std::size_t r = 0; r < count; ++r) {
      for (std::size_t f = 0; f < F; ++f) sum[f] += data[r * F + f];
    }
    rows += count;
  }
  if (rows == 0) {
    shift.fill(0.0);
    scale.fill(1.0);
    return;
  }
  for (std::size_t f = 0; f < F; ++f) shift[f] = sum[f] / static_cast<double>(rows);
  for (const auto& [data, count] : blocks) {
    for (std::size_t r = 0; r < count; ++r) {
      for (std::size_t f = 0; f < F; ++f) {
        const double d = data[r * F + f] - shift[f];
        sq[f] += d * d;
      }
    }
  }
  for (std::size_t f = 0; f < F; ++f) {
    const double sd = std::sqrt(sq[f] / static_cast<double>(rows));
    scale[f] = sd > 1e-12 * std::max(1.0, std::abs(shift[f])) ? 1.0 / sd : 0.0;
  }
}

}  // namespace

Prenorm Prenorm::fit(const std::vector<const BipartiteState*>& states) {
  std::vector<std::pair<const double*, std::size_t>> cons, edges, vars;
  for (const BipartiteState* s : states) {
    cons.emplace_back(s->cons.data(), static_cast<std::size_t>(s->num_rows));
    edges.emplace_back(s->edge_val.data(), s->num_edges());
    vars.emplace_back(s->vars.data(), static_cast<std::size_t>(s->num_vars));
  }
  Prenorm p;
  fit_columns(cons, p.cons_shift, p.cons_scale);
  fit_columns(edges, p.edge_shift, p.edge_scale);
  fit_columns(vars, p.var_shift, p.var_scale);
  return p;
}

std::span<double> GcnnParams::tensor(int t) {
  const auto layout = gcnn_layout(h);
  return {values.data() + layout[t].offset, layout[t].size()};
}

std::span<const double> GcnnParams::tensor(int t) const {
  const auto layout = gcnn_layout(h);
  return {values.data() + layout[t].offset, layout[t].size()};
}

GcnnParams init_params(const GcnnConfig& config, std::uint64_t seed) {
  GcnnParams params;
  params.h = config.h;
  const auto layout = gcnn_layout(config.h);
  params.values.assign(layout.back().offset + layout.back().size(), 0.0);
  Rng rng(seed);
  for (const TensorInfo& t : layout) {
    if (t.cols == 1 && t.rows == config.h && t.name.back() == 'b') continue;
    const double limit = std::sqrt(6.0 / static_cast<double>(t.rows + t.cols));
    for (std::size_t k = 0; k < t.size(); ++k) {
      params.values[t.offset + k] = (2.0 * uniform01(rng) - 1.0) * limit;
    }
  }
  return params;
}

namespace {

void check_params(const GcnnParams& params) {
  const auto layout = gcnn_layout(params.h);
  if (params.values.size() != layout.back().offset + layout.back().size()) {
    throw InvalidArgument("parameter vector does not match the layer inventory");
  }
}

template <typename T>
std::vector<T> forward_impl(const BipartiteState& state, const T* values,
                            const GcnnParams& params, ExecMode mode) {
  gcnn::ForwardCache<T> cache;
  gcnn::run_forward(state, values, gcnn_layout(params.h), params.prenorm,
                    params.h, mode, cache);
  return std::move(cache.logits);
}

}  // namespace

std::vector<double> forward(const BipartiteState& state,
                            const GcnnParams& params, ExecMode mode) {
  check_params(params);
  return forward_impl(state, params.values.data(), params, mode);
}

std::vector<float> forward_f32(const BipartiteState& state,
                               const GcnnParams& params, ExecMode mode) {
  check_params(params);
  const std::vector<float> values(params.values.begin(), params.values.end());
  return forward_impl(state, values.data(), params, mode);
}

std::vector<double> masked_softmax(std::span<const double> logits,
                                   const std::vector<int>& candidates) {
  std::vector<double> out(logits.size(), 0.0);
  if (candidates.empty()) return out;
  double top = -kInf;
  for (int j : candidates) top = std::max(top, logits[j]);
  double total = 0.0;
  for (int j : candidates) {
    out[j] = std::exp(logits[j] - top);
    total += out[j];
  }
  for (int j : candidates) out[j] /= total;
  return out;
}

double latency_probe(const GcnnParams& params, const BipartiteState& state,
                     int repetitions, Precision precision, ExecMode mode) {
  check_params(params);
  if (repetitions < 1) throw InvalidArgument("repetitions must be positive");
  const std::vector<float> values32(params.values.begin(), params.values.end());
  double sink = 0.0;
  auto once = [&] {
    if (precision == Precision::kDouble) {
      for (double z : forward_impl(state, params.values.data(), params, mode)) sink += z;
    } else {
      for (float z : forward_impl(state, values32.data(), params, mode)) sink += z;
    }
  };
  for (int i = 0; i < 10; ++i) once();
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < repetitions; ++i) once();
  const std::chrono::duration<double, std::milli> spent =
      std::chrono::steady_clock::now() - start;
  if (!std::isfinite(sink)) throw Error("latency probe produced non-finite logits");
  return spent.count() / repetitions;
}

int GcnnController::choose(Episode& episode, const Observation& observation) {
  (void)episode;
  const std::vector<double> logits = forward(observation.state, params_, mode_);
  int best = observation.candidates.front();
  for (int j : observation.candidates) {
    if (logits[j] > logits[best] || (logits[j] == logits[best] && j < best)) {
      best = j;
    }
  }
  return best;
}

}  // namespace branchlab
