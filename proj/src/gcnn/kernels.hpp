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


// Forward kernels of the GCNN, templated on the scalar type. Every output
// element is produced by exactly one loop iteration with a fixed reduction
// order, so the OpenMP drivers return the same bits as the serial loops.

#ifndef BRANCHLAB_SRC_GCNN_KERNELS_HPP_
#define BRANCHLAB_SRC_GCNN_KERNELS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <string>
#include <vector>

#include "branchlab/common.hpp"
#include "branchlab/features.hpp"
#include "branchlab/gcnn.hpp"

namespace branchlab::gcnn {

template <typename Fn>
void for_each_index(std::size_t count, ExecMode mode, Fn&& fn) {
  if (mode == ExecMode::kSerial) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  // Exceptions cannot leave an OpenMP region; the one from the lowest index
  // is rethrown.
  const auto n = static_cast<std::ptrdiff_t>(count);
  std::exception_ptr error;
  std::ptrdiff_t error_at = n;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(branchlab_kernel_error)
      if (i < error_at) {
        error_at = i;
        error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

// Edge lists grouped by endpoint, stable in edge order.
struct Graph {
  int m = 0;
  int n = 0;
  std::size_t nnz = 0;
  const int* row = nullptr;
  const int* col = nullptr;
  std::vector<std::size_t> row_ptr, row_idx, col_ptr, col_idx;

  explicit Graph(const BipartiteState& s);
};

inline Graph::Graph(const BipartiteState& s)
    : m(s.num_rows), n(s.num_vars), nnz(s.num_edges()),
      row(s.edge_row.data()), col(s.edge_col.data()) {
  auto group = [&](const int* key, int count, std::vector<std::size_t>& ptr,
                   std::vector<std::size_t>& idx) {
    ptr.assign(count + 1, 0);
    for (std::size_t k = 0; k < nnz; ++k) ++ptr[key[k] + 1];
    for (int i = 0; i < count; ++i) ptr[i + 1] += ptr[i];
    idx.resize(nnz);
    std::vector<std::size_t> fill(ptr.begin(), ptr.end() - 1);
    for (std::size_t k = 0; k < nnz; ++k) idx[fill[key[k]]++] = k;
  };
  group(row, m, row_ptr, row_idx);
  group(col, n, col_ptr, col_idx);
}

// out[o] = (b ? b[o] : 0) + sum_k W[o * ld + off + k] * in[k]
template <typename T>
inline void affine_row(const T* in, int in_dim, const T* w, int ld, int off,
                       const T* b, int out_dim, T* out) {
  for (int o = 0; o < out_dim; ++o) {
    T acc = b ? b[o] : T(0);
    const T* wr = w + static_cast<std::size_t>(o) * ld + off;
    for (int k = 0; k < in_dim; ++k) acc += wr[k] * in[k];
    out[o] = acc;
  }
}

// out[o] += sum_k W[o * ld + off + k] * in[k], continuing the same sum.
template <typename T>
inline void accumulate_row(const T* in, int in_dim, const T* w, int ld,
                           int off, int out_dim, T* out) {
  for (int o = 0; o < out_dim; ++o) {
    T acc = out[o];
    const T* wr = w + static_cast<std::size_t>(o) * ld + off;
    for (int k = 0; k < in_dim; ++k) acc += wr[k] * in[k];
    out[o] = acc;
  }
}

template <typename T>
inline T relu(T x) {
  return x > T(0) ? x : T(0);
}

template <typename T>
void relu_inplace(std::vector<T>& v) {
  for (T& x : v) x = relu(x);
}

// Dense layer over `rows` inputs of width in_dim.
template <typename T>
void affine(const std::vector<T>& in, int rows, int in_dim, const T* w,
            const T* b, int out_dim, std::vector<T>& out, ExecMode mode) {
  out.assign(static_cast<std::size_t>(rows) * out_dim, T(0));
  for_each_index(rows, mode, [&](std::size_t r) {
    affine_row(&in[r * in_dim], in_dim, w, in_dim, 0, b, out_dim,
               &out[r * out_dim]);
  });
}

template <typename T>
void check_finite(const std::vector<T>& v, const char* layer) {
  for (T x : v) {
    if (!std::isfinite(x)) {
      throw Error(std::string("non-finite activation in layer ") + layer);
    }
  }
}

template <typename T>
struct ConvCache {
  std::vector<T> ps, pt;  // source / target projections of the message
  std::vector<T> pre;     // per-edge message before relu, nnz x h
  std::vector<T> agg, post, u, out;
};

template <typename T>
struct ForwardCache {
  std::vector<T> c0, v0, e0;
  std::vector<T> c_a, c1, v_a, v1;
  ConvCache<T> vc, cv;
  std::vector<T> head_a;
  std::vector<T> logits;
};

// One half-convolution. src has n_src rows, tgt n_tgt rows (both width h);
// edges connect src_of[k] -> tgt_of[k]; grouped[ptr[t]..ptr[t+1]) lists the
// edges entering t. Tensor ids follow the conv_vc / conv_cv block layout.
template <typename T>
void convolve(const std::vector<T>& src, int n_src, const std::vector<T>& tgt,
              int n_tgt, const std::vector<T>& e, const int* src_of,
              const int* tgt_of, const std::vector<std::size_t>& ptr,
              const std::vector<std::size_t>& grouped, const T* msg_w,
              const T* post_w, const T* post_b, const T* up1_w,
              const T* up1_b, const T* up2_w, const T* up2_b, int h,
              ExecMode mode, const char* layer, ConvCache<T>& c) {
  const int ld = 2 * h + 1;
  const std::size_t nnz = e.size();
  c.ps.assign(static_cast<std::size_t>(n_src) * h, T(0));
  c.pt.assign(static_cast<std::size_t>(n_tgt) * h, T(0));
  for_each_index(n_src, mode, [&](std::size_t r) {
    affine_row(&src[r * h], h, msg_w, ld, 0, static_cast<const T*>(nullptr),
               h, &c.ps[r * h]);
  });
  for_each_index(n_tgt, mode, [&](std::size_t r) {
    affine_row(&tgt[r * h], h, msg_w, ld, h + 1,
               static_cast<const T*>(nullptr), h, &c.pt[r * h]);
  });
  c.pre.assign(nnz * h, T(0));
  for_each_index(nnz, mode, [&](std::size_t k) {
    const T* ps = &c.ps[static_cast<std::size_t>(src_of[k]) * h];
    const T* pt = &c.pt[static_cast<std::size_t>(tgt_of[k]) * h];
    T* out = &c.pre[k * h];
    for (int o = 0; o < h; ++o) {
      out[o] = ps[o] + msg_w[static_cast<std::size_t>(o) * ld + h] * e[k] + pt[o];
    }
  });
  check_finite(c.pre, layer);
  c.agg.assign(static_cast<std::size_t>(n_tgt) * h, T(0));
  for_each_index(n_tgt, mode, [&](std::size_t t) {
    const std::size_t begin = ptr[t], end = ptr[t + 1];
    std::vector<T> vals(end - begin);
    for (int o = 0; o < h; ++o) {
      for (std::size_t q = begin; q < end; ++q) {
        vals[q - begin] = relu(c.pre[grouped[q] * h + o]);
      }
      std::sort(vals.begin(), vals.end());
      T acc = T(0);
      for (T v : vals) acc += v;
      c.agg[t * h + o] = acc;
    }
  });
  affine(c.agg, n_tgt, h, post_w, post_b, h, c.post, mode);
  c.u.assign(static_cast<std::size_t>(n_tgt) * h, T(0));
  for_each_index(n_tgt, mode, [&](std::size_t t) {
    affine_row(&c.post[t * h], h, up1_w, 2 * h, 0, up1_b, h, &c.u[t * h]);
    accumulate_row(&tgt[t * h], h, up1_w, 2 * h, h, h, &c.u[t * h]);
  });
  check_finite(c.u, layer);
  relu_inplace(c.u);
  affine(c.u, n_tgt, h, up2_w, up2_b, h, c.out, mode);
  check_finite(c.out, layer);
}

// `p` holds the parameter values in inventory order (already in T).
template <typename T>
void run_forward(const BipartiteState& s, const T* p,
                 const std::vector<TensorInfo>& layout, const Prenorm& pn,
                 int h, ExecMode mode, ForwardCache<T>& c) {
  const int m = s.num_rows;
  const int n = s.num_vars;
  if (s.cons.size() != static_cast<std::size_t>(m) * kConsFeatures ||
      s.vars.size() != static_cast<std::size_t>(n) * kVarFeatures ||
      s.edge_row.size() != s.edge_val.size() ||
      s.edge_col.size() != s.edge_val.size()) {
    throw InvalidArgument("state tensors do not match (5, 1, 19) feature dims");
  }
  for (std::size_t k = 0; k < s.num_edges(); ++k) {
    if (s.edge_row[k] < 0 || s.edge_row[k] >= m || s.edge_col[k] < 0 ||
        s.edge_col[k] >= n) {
      throw InvalidArgument("edge endpoint out of range");
    }
  }
  auto t = [&](int id) { return p + layout[id].offset; };
  const Graph g(s);

  c.c0.resize(s.cons.size());
  for (std::size_t k = 0; k < s.cons.size(); ++k) {
    const std::size_t f = k % kConsFeatures;
    c.c0[k] = (static_cast<T>(s.cons[k]) - static_cast<T>(pn.cons_shift[f])) *
              static_cast<T>(pn.cons_scale[f]);
  }
  c.v0.resize(s.vars.size());
  for (std::size_t k = 0; k < s.vars.size(); ++k) {
    const std::size_t f = k % kVarFeatures;
    c.v0[k] = (static_cast<T>(s.vars[k]) - static_cast<T>(pn.var_shift[f])) *
              static_cast<T>(pn.var_scale[f]);
  }
  c.e0.resize(s.num_edges());
  for (std::size_t k = 0; k < s.num_edges(); ++k) {
    c.e0[k] = (static_cast<T>(s.edge_val[k]) - static_cast<T>(pn.edge_shift[0])) *
              static_cast<T>(pn.edge_scale[0]);
  }

  // Checked before each relu, which would otherwise swallow NaN.
  check_finite(c.c0, "cons_prenorm");
  check_finite(c.v0, "var_prenorm");
  check_finite(c.e0, "edge_prenorm");
  affine(c.c0, m, kConsFeatures, t(kConsEmbed1W), t(kConsEmbed1B), h, c.c_a, mode);
  check_finite(c.c_a, "cons_embed1");
  relu_inplace(c.c_a);
  affine(c.c_a, m, h, t(kConsEmbed2W), t(kConsEmbed2B), h, c.c1, mode);
  check_finite(c.c1, "cons_embed2");
  relu_inplace(c.c1);
  affine(c.v0, n, kVarFeatures, t(kVarEmbed1W), t(kVarEmbed1B), h, c.v_a, mode);
  check_finite(c.v_a, "var_embed1");
  relu_inplace(c.v_a);
  affine(c.v_a, n, h, t(kVarEmbed2W), t(kVarEmbed2B), h, c.v1, mode);
  check_finite(c.v1, "var_embed2");
  relu_inplace(c.v1);

  convolve(c.v1, n, c.c1, m, c.e0, g.col, g.row, g.row_ptr, g.row_idx,
           t(kVcMessageW), t(kVcPostW), t(kVcPostB), t(kVcUpdate1W),
           t(kVcUpdate1B), t(kVcUpdate2W), t(kVcUpdate2B), h, mode, "conv_vc",
           c.vc);
  convolve(c.vc.out, m, c.v1, n, c.e0, g.row, g.col, g.col_ptr, g.col_idx,
           t(kCvMessageW), t(kCvPostW), t(kCvPostB), t(kCvUpdate1W),
           t(kCvUpdate1B), t(kCvUpdate2W), t(kCvUpdate2B), h, mode, "conv_cv",
           c.cv);

  affine(c.cv.out, n, h, t(kHead1W), t(kHead1B), h, c.head_a, mode);
  check_finite(c.head_a, "head1");
  relu_inplace(c.head_a);
  c.logits.assign(n, T(0));
  const T* w = t(kHead2W);
  for_each_index(n, mode, [&](std::size_t j) {
    affine_row(&c.head_a[j * h], h, w, h, 0, static_cast<const T*>(nullptr), 1,
               &c.logits[j]);
  });
  check_finite(c.logits, "head2");
}

}  // namespace branchlab::gcnn

#endif  // BRANCHLAB_SRC_GCNN_KERNELS_HPP_
