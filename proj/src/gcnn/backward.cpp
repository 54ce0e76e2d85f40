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

#include "branchlab/gcnn.hpp"
#include "gcnn/kernels.hpp"

namespace branchlab {

namespace {

using gcnn::ConvCache;
using gcnn::ForwardCache;

// Backward of out = W[:, off:off+in_dim] * in (+ b) over `rows` rows.
// Accumulates into gw (same row stride `ld`), gb and, when given, d_in.
void dense_backward(const double* d_out, const double* in, int rows,
                    int in_dim, int out_dim, const double* w, int ld, int off,
                    double* gw, double* gb, double* d_in) {
  for (int r = 0; r < rows; ++r) {
    const double* dr = d_out + static_cast<std::size_t>(r) * out_dim;
    const double* xr = in + static_cast<std::size_t>(r) * in_dim;
    for (int o = 0; o < out_dim; ++o) {
      const double d = dr[o];
      if (d == 0.0) continue;
      double* g = gw + static_cast<std::size_t>(o) * ld + off;
      for (int k = 0; k < in_dim; ++k) g[k] += d * xr[k];
      if (gb) gb[o] += d;
      if (d_in) {
        const double* wr = w + static_cast<std::size_t>(o) * ld + off;
        double* di = d_in + static_cast<std::size_t>(r) * in_dim;
        for (int k = 0; k < in_dim; ++k) di[k] += d * wr[k];
      }
    }
  }
}

void relu_mask(std::vector<double>& d, const std::vector<double>& activated) {
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (!(activated[k] > 0.0)) d[k] = 0.0;
  }
}

struct ConvTensors {
  int msg, post_w, post_b, up1_w, up1_b, up2_w, up2_b;
};

// Given d_out for the convolution output, accumulates parameter gradients
// and adds the input gradients to d_src and d_tgt.
void conv_backward(const ConvCache<double>& c, const std::vector<double>& src,
                   int n_src, const std::vector<double>& tgt, int n_tgt,
                   const std::vector<double>& e, const int* src_of,
                   const int* tgt_of, std::vector<double> d_out,
                   const double* p, double* g,
                   const std::vector<TensorInfo>& layout, ConvTensors ids,
                   int h, std::vector<double>& d_src,
                   std::vector<double>& d_tgt) {
  auto pt = [&](int id) { return p + layout[id].offset; };
  auto gt = [&](int id) { return g + layout[id].offset; };
  const int ld = 2 * h + 1;

  std::vector<double> d_u(static_cast<std::size_t>(n_tgt) * h, 0.0);
  dense_backward(d_out.data(), c.u.data(), n_tgt, h, h, pt(ids.up2_w), h, 0,
                 gt(ids.up2_w), gt(ids.up2_b), d_u.data());
  relu_mask(d_u, c.u);
  std::vector<double> d_post(static_cast<std::size_t>(n_tgt) * h, 0.0);
  dense_backward(d_u.data(), c.post.data(), n_tgt, h, h, pt(ids.up1_w), 2 * h,
                 0, gt(ids.up1_w), gt(ids.up1_b), d_post.data());
  dense_backward(d_u.data(), tgt.data(), n_tgt, h, h, pt(ids.up1_w), 2 * h, h,
                 gt(ids.up1_w), nullptr, d_tgt.data());
  std::vector<double> d_agg(static_cast<std::size_t>(n_tgt) * h, 0.0);
  dense_backward(d_post.data(), c.agg.data(), n_tgt, h, h, pt(ids.post_w), h,
                 0, gt(ids.post_w), gt(ids.post_b), d_agg.data());

  // Per-edge message gradient, summed per endpoint before the projections.
  const double* w = pt(ids.msg);
  double* gw = gt(ids.msg);
  std::vector<double> d_ps(static_cast<std::size_t>(n_src) * h, 0.0);
  std::vector<double> d_pt(static_cast<std::size_t>(n_tgt) * h, 0.0);
  for (std::size_t k = 0; k < e.size(); ++k) {
    const std::size_t s = src_of[k], t = tgt_of[k];
    for (int o = 0; o < h; ++o) {
      if (!(c.pre[k * h + o] > 0.0)) continue;
      const double d = d_agg[t * h + o];
      d_ps[s * h + o] += d;
      d_pt[t * h + o] += d;
      gw[static_cast<std::size_t>(o) * ld + h] += d * e[k];
    }
  }
  dense_backward(d_ps.data(), src.data(), n_src, h, h, w, ld, 0, gw, nullptr,
                 d_src.data());
  dense_backward(d_pt.data(), tgt.data(), n_tgt, h, h, w, ld, h + 1, gw,
                 nullptr, d_tgt.data());
}

// Adds d loss / d params of one sample, weighted by `weight`, to g.
double sample_backward(const Sample& sample, const GcnnParams& params,
                       const std::vector<TensorInfo>& layout, double weight,
                       double* g) {
  const BipartiteState& s = sample.state;
  if (sample.candidates.empty() ||
      std::find(sample.candidates.begin(), sample.candidates.end(),
                sample.expert_action) == sample.candidates.end()) {
    throw InvalidArgument("expert action is not among the candidates");
  }
  for (int j : sample.candidates) {
    if (j < 0 || j >= s.num_vars) throw InvalidArgument("candidate out of range");
  }
  const int h = params.h;
  const int m = s.num_rows;
  const int n = s.num_vars;
  const double* p = params.values.data();
  ForwardCache<double> c;
  gcnn::run_forward(s, p, layout, params.prenorm, h, ExecMode::kSerial, c);

  const std::vector<double> prob = masked_softmax(c.logits, sample.candidates);
  const double loss = -std::log(std::max(prob[sample.expert_action], 1e-300));
  if (!g) return loss;

  std::vector<double> dz(n, 0.0);
  for (int j : sample.candidates) dz[j] = weight * prob[j];
  dz[sample.expert_action] -= weight;

  auto pt = [&](int id) { return p + layout[id].offset; };
  auto gt = [&](int id) { return g + layout[id].offset; };

  std::vector<double> d_a(static_cast<std::size_t>(n) * h, 0.0);
  dense_backward(dz.data(), c.head_a.data(), n, h, 1, pt(kHead2W), h, 0,
                 gt(kHead2W), nullptr, d_a.data());
  relu_mask(d_a, c.head_a);
  std::vector<double> d_v2(static_cast<std::size_t>(n) * h, 0.0);
  dense_backward(d_a.data(), c.cv.out.data(), n, h, h, pt(kHead1W), h, 0,
                 gt(kHead1W), gt(kHead1B), d_v2.data());

  std::vector<double> d_c2(static_cast<std::size_t>(m) * h, 0.0);
  std::vector<double> d_v1(static_cast<std::size_t>(n) * h, 0.0);
  conv_backward(c.cv, c.vc.out, m, c.v1, n, c.e0, s.edge_row.data(),
                s.edge_col.data(), std::move(d_v2), p, g, layout,
                {kCvMessageW, kCvPostW, kCvPostB, kCvUpdate1W, kCvUpdate1B,
                 kCvUpdate2W, kCvUpdate2B},
                h, d_c2, d_v1);
  std::vector<double> d_c1(static_cast<std::size_t>(m) * h, 0.0);
  conv_backward(c.vc, c.v1, n, c.c1, m, c.e0, s.edge_col.data(),
                s.edge_row.data(), std::move(d_c2), p, g, layout,
                {kVcMessageW, kVcPostW, kVcPostB, kVcUpdate1W, kVcUpdate1B,
                 kVcUpdate2W, kVcUpdate2B},
                h, d_v1, d_c1);

  relu_mask(d_c1, c.c1);
  std::vector<double> d_ca(static_cast<std::size_t>(m) * h, 0.0);
  dense_backward(d_c1.data(), c.c_a.data(), m, h, h, pt(kConsEmbed2W), h, 0,
                 gt(kConsEmbed2W), gt(kConsEmbed2B), d_ca.data());
  relu_mask(d_ca, c.c_a);
  dense_backward(d_ca.data(), c.c0.data(), m, kConsFeatures, h,
                 pt(kConsEmbed1W), kConsFeatures, 0, gt(kConsEmbed1W),
                 gt(kConsEmbed1B), nullptr);

  relu_mask(d_v1, c.v1);
  std::vector<double> d_va(static_cast<std::size_t>(n) * h, 0.0);
  dense_backward(d_v1.data(), c.v_a.data(), n, h, h, pt(kVarEmbed2W), h, 0,
                 gt(kVarEmbed2W), gt(kVarEmbed2B), d_va.data());
  relu_mask(d_va, c.v_a);
  dense_backward(d_va.data(), c.v0.data(), n, kVarFeatures, h,
                 pt(kVarEmbed1W), kVarFeatures, 0, gt(kVarEmbed1W),
                 gt(kVarEmbed1B), nullptr);
  return loss;
}

}  // namespace

LossAndGrads loss_and_grads(const std::vector<const Sample*>& batch,
                            const GcnnParams& params) {
  if (batch.empty()) throw InvalidArgument("empty batch");
  const auto layout = gcnn_layout(params.h);
  if (params.values.size() != layout.back().offset + layout.back().size()) {
    throw InvalidArgument("parameter vector does not match the layer inventory");
  }
  // Per-sample buffers summed in batch order, so the result does not depend
  // on the thread count.
  const std::size_t count = batch.size();
  const double weight = 1.0 / static_cast<double>(count);
  std::vector<std::vector<double>> grads(count);
  std::vector<double> losses(count, 0.0);
  gcnn::for_each_index(count, ExecMode::kParallel, [&](std::size_t k) {
    grads[k].assign(params.values.size(), 0.0);
    losses[k] = sample_backward(*batch[k], params, layout, weight, grads[k].data());
  });
  LossAndGrads out;
  out.grads.assign(params.values.size(), 0.0);
  for (std::size_t k = 0; k < count; ++k) {
    out.loss += losses[k];
    for (std::size_t i = 0; i < out.grads.size(); ++i) out.grads[i] += grads[k][i];
  }
  out.loss *= weight;
  return out;
}

double batch_loss(const std::vector<const Sample*>& batch,
                  const GcnnParams& params) {
  if (batch.empty()) throw InvalidArgument("empty batch");
  const auto layout = gcnn_layout(params.h);
  double loss = 0.0;
  for (const Sample* sample : batch) {
    loss += sample_backward(*sample, params, layout, 0.0, nullptr);
  }
  return loss / static_cast<double>(batch.size());
}

}  // namespace branchlab
