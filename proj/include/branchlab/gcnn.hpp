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


// Bipartite graph-convolutional branching policy.
//
// Layer inventory for embedding size h (tensor order of GcnnParams::values
// and of the model file):
//
//   cons_embed1   W h x 5,  b h        relu
//   cons_embed2   W h x h,  b h        relu
//   var_embed1    W h x 19, b h        relu
//   var_embed2    W h x h,  b h        relu
//   conv_vc       variables -> constraints
//     message     W h x (2h+1), no bias, relu, on [v_src | e | c_tgt]
//     post        W h x h,  b h        after sum aggregation
//     update1     W h x 2h, b h        relu, on [post | c_tgt]
//     update2     W h x h,  b h
//   conv_cv       constraints -> variables, same shapes on [c_src | e | v_tgt]
//   head1         W h x h,  b h        relu
//   head2         W 1 x h,  no bias
//
// Count: 15 h^2 + 38 h (136 at h = 2, 1264 at h = 8, 63872 at h = 64).
// Prenorm shift/scale are fitted from data and are not counted.
//
// Aggregation sums each dimension over the values sorted ascending, so the
// result does not depend on edge order and logits permute bitwise with the
// nodes.

#ifndef BRANCHLAB_GCNN_HPP_
#define BRANCHLAB_GCNN_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "branchlab/bnb.hpp"
#include "branchlab/common.hpp"
#include "branchlab/dataset.hpp"
#include "branchlab/features.hpp"

namespace branchlab {

struct GcnnConfig {
  int h = 8;
};

struct TensorInfo {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::size_t offset = 0;
  std::size_t size() const { return static_cast<std::size_t>(rows) * cols; }
};

enum GcnnTensor : int {
  kConsEmbed1W = 0, kConsEmbed1B, kConsEmbed2W, kConsEmbed2B,
  kVarEmbed1W, kVarEmbed1B, kVarEmbed2W, kVarEmbed2B,
  kVcMessageW, kVcPostW, kVcPostB, kVcUpdate1W, kVcUpdate1B, kVcUpdate2W,
  kVcUpdate2B,
  kCvMessageW, kCvPostW, kCvPostB, kCvUpdate1W, kCvUpdate1B, kCvUpdate2W,
  kCvUpdate2B,
  kHead1W, kHead1B, kHead2W,
  kNumGcnnTensors,
};

std::vector<TensorInfo> gcnn_layout(int h);
std::int64_t param_count(const GcnnConfig& config);

// Fixed input standardization: (x - shift) * scale per feature column.
struct Prenorm {
  std::array<double, kConsFeatures> cons_shift{}, cons_scale{};
  std::array<double, kEdgeFeatures> edge_shift{}, edge_scale{};
  std::array<double, kVarFeatures> var_shift{}, var_scale{};

  static Prenorm identity();
  // Per-feature mean and 1/std over every row of every state; features with
  // zero spread get scale 0.
  static Prenorm fit(const std::vector<const BipartiteState*>& states);
  bool operator==(const Prenorm&) const = default;
};

struct GcnnParams {
  int h = 0;
  Prenorm prenorm = Prenorm::identity();
  std::vector<double> values;  // tensors in inventory order

  std::span<double> tensor(int t);
  std::span<const double> tensor(int t) const;
  bool operator==(const GcnnParams&) const = default;
};

// Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
GcnnParams init_params(const GcnnConfig& config, std::uint64_t seed);

enum class Precision { kDouble, kFloat };

// Per-variable logits. Throws Error naming the layer on a non-finite value.
std::vector<double> forward(const BipartiteState& state,
                            const GcnnParams& params,
                            ExecMode mode = ExecMode::kSerial);
// Single-precision copy of the same network, for latency measurements.
std::vector<float> forward_f32(const BipartiteState& state,
                               const GcnnParams& params,
                               ExecMode mode = ExecMode::kSerial);

// Softmax restricted to `candidates`; other entries are 0.
std::vector<double> masked_softmax(std::span<const double> logits,
                                   const std::vector<int>& candidates);

struct LossAndGrads {
  double loss = 0.0;
  std::vector<double> grads;  // same layout as GcnnParams::values
};

// Mean cross-entropy of the expert action under the masked softmax.
LossAndGrads loss_and_grads(const std::vector<const Sample*>& batch,
                            const GcnnParams& params);
double batch_loss(const std::vector<const Sample*>& batch,
                  const GcnnParams& params);

struct TrainConfig {
  int batch_size = 64;
  double lr = 1e-3;
  int plateau_patience = 10;
  double decay = 0.2;
  int early_stop = 20;
  int max_epochs = 50;
  std::uint64_t seed = 0;
  int h = 8;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double valid_loss = 0.0;
  double lr = 0.0;
  std::array<double, 4> valid_topk{};  // top-1, 3, 5, 10 in percent
};

struct TrainResult {
  GcnnParams params;  // best validation loss
  std::vector<EpochRecord> history;
  int best_epoch = 0;
};

// Prenorm is fitted on `dataset.train`. When the validation split is empty
// the training loss drives model selection and the schedule.
TrainResult train(const Dataset& dataset, const TrainConfig& config);
// Continues from given parameters (prenorm untouched).
TrainResult train_from(const Dataset& dataset, const TrainConfig& config,
                       GcnnParams start);

// Model file: magic "BLABGCNN", u32 version, u32 h, u32 5, u32 1, u32 19,
// prenorm (cons shift, cons scale, edge shift, edge scale, var shift, var
// scale), then every tensor in inventory order; little-endian f64.
inline constexpr std::uint32_t kModelVersion = 1;
std::string encode_model(const GcnnParams& params);
GcnnParams decode_model(const std::string& bytes);
void save_model(const GcnnParams& params, const std::filesystem::path& path);
GcnnParams load_model(const std::filesystem::path& path);

// Mean milliseconds per forward over `repetitions` calls after 10 warm-ups.
double latency_probe(const GcnnParams& params, const BipartiteState& state,
                     int repetitions, Precision precision = Precision::kDouble,
                     ExecMode mode = ExecMode::kSerial);

// Branches on the candidate with the highest logit (ties: lowest index).
class GcnnController : public BranchingController {
 public:
  explicit GcnnController(GcnnParams params,
                          ExecMode mode = ExecMode::kParallel)
      : params_(std::move(params)), mode_(mode) {}
  std::string name() const override { return "gcnn"; }
  bool needs_state() const override { return true; }
  int choose(Episode& episode, const Observation& observation) override;
  const GcnnParams& params() const { return params_; }

 private:
  GcnnParams params_;
  ExecMode mode_;
};

}  // namespace branchlab

#endif  // BRANCHLAB_GCNN_HPP_
