#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "geofuse/linalg.hpp"

namespace geofuse {

constexpr double kLayerNormEps = 1e-5;

/// One pre-norm transformer encoder block, single head:
///   h   = x + (softmax(LN1(x) Wq Kt / sqrt(D)) V) Wo
///   out = h + W2 . gelu(W1 . LN2(h))
/// Matrices act on row vectors (token rows), so Wq etc. are input x output.
struct EncoderBlockWeights {
  std::vector<double> ln1_gamma, ln1_beta;  // D
  Mat wq, wk, wv, wo;                       // D x D
  std::vector<double> bq, bk, bv, bo;       // D
  std::vector<double> ln2_gamma, ln2_beta;  // D
  Mat w1;                                   // D x H
  std::vector<double> b1;                   // H
  Mat w2;                                   // H x D
  std::vector<double> b2;                   // D

  size_t dim() const { return wq.rows; }
  size_t hidden() const { return w1.cols; }

  static EncoderBlockWeights zeros(size_t d, size_t h) {
    EncoderBlockWeights w;
    w.ln1_gamma.assign(d, 0.0);
    w.ln1_beta.assign(d, 0.0);
    w.wq = Mat(d, d);
    w.wk = Mat(d, d);
    w.wv = Mat(d, d);
    w.wo = Mat(d, d);
    w.bq.assign(d, 0.0);
    w.bk.assign(d, 0.0);
    w.bv.assign(d, 0.0);
    w.bo.assign(d, 0.0);
    w.ln2_gamma.assign(d, 0.0);
    w.ln2_beta.assign(d, 0.0);
    w.w1 = Mat(d, h);
    w.b1.assign(h, 0.0);
    w.w2 = Mat(h, d);
    w.b2.assign(d, 0.0);
    return w;
  }

  void validate() const {
    size_t d = dim();
    size_t h = hidden();
    if (d == 0 || h == 0) throw shape_error("encoder block: zero dimension");
    auto chk = [&](bool ok) {
      if (!ok) throw shape_error("encoder block: weight shapes inconsistent with D");
    };
    chk(ln1_gamma.size() == d && ln1_beta.size() == d);
    chk(wq.rows == d && wq.cols == d && wk.rows == d && wk.cols == d);
    chk(wv.rows == d && wv.cols == d && wo.rows == d && wo.cols == d);
    chk(bq.size() == d && bk.size() == d && bv.size() == d && bo.size() == d);
    chk(ln2_gamma.size() == d && ln2_beta.size() == d);
    chk(w1.rows == d && w1.cols == h && b1.size() == h);
    chk(w2.rows == h && w2.cols == d && b2.size() == d);
  }
};

namespace detail {

inline double gelu(double x) {
  return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0)));
}

inline double gelu_grad(double x) {
  constexpr double inv_sqrt_2pi = 0.3989422804014326779;
  return 0.5 * (1.0 + std::erf(x / std::sqrt(2.0))) +
         x * inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

struct LayerNormRow {
  std::vector<double> xhat;
  double inv_std = 0.0;
};

inline LayerNormRow layer_norm_row(const double* x, size_t d) {
  LayerNormRow out;
  out.xhat.resize(d);
  double mean = 0.0;
  for (size_t j = 0; j < d; ++j) mean += x[j];
  mean /= static_cast<double>(d);
  double var = 0.0;
  for (size_t j = 0; j < d; ++j) var += (x[j] - mean) * (x[j] - mean);
  var /= static_cast<double>(d);
  out.inv_std = 1.0 / std::sqrt(var + kLayerNormEps);
  for (size_t j = 0; j < d; ++j) out.xhat[j] = (x[j] - mean) * out.inv_std;
  return out;
}

}  // namespace detail

/// Everything the forward pass computes, kept for the backward pass and for
/// inspection (the attention matrix in particular).
struct EncoderBlockTrace {
  Mat xhat1, n1;          // T x D
  std::vector<double> inv_std1;
  Mat q, k, v;            // T x D
  Mat attention;          // T x T, softmax rows
  Mat ctx;                // T x D
  Mat h;                  // T x D, post first residual
  Mat xhat2, n2;          // T x D
  std::vector<double> inv_std2;
  Mat pre_act;            // T x H
  Mat act;                // T x H
  Mat out;                // T x D
};

inline EncoderBlockTrace encoder_block_forward_traced(const Mat& x,
                                                      const EncoderBlockWeights& w) {
  w.validate();
  size_t t_count = x.rows;
  size_t d = w.dim();
  size_t hid = w.hidden();
  if (x.cols != d) throw shape_error("encoder block: token dim != weight dim");
  for (double v : x.a)
    if (std::isnan(v)) throw data_error("encoder block: NaN in input tokens");

  EncoderBlockTrace tr;
  tr.xhat1 = Mat(t_count, d);
  tr.n1 = Mat(t_count, d);
  tr.inv_std1.resize(t_count);
  for (size_t t = 0; t < t_count; ++t) {
    auto ln = detail::layer_norm_row(&x.a[t * d], d);
    tr.inv_std1[t] = ln.inv_std;
    for (size_t j = 0; j < d; ++j) {
      tr.xhat1(t, j) = ln.xhat[j];
      tr.n1(t, j) = w.ln1_gamma[j] * ln.xhat[j] + w.ln1_beta[j];
    }
  }

  auto linear = [&](const Mat& in, const Mat& weight, const std::vector<double>& bias) {
    Mat out = matmul(in, weight);
    for (size_t t = 0; t < out.rows; ++t)
      for (size_t j = 0; j < out.cols; ++j) out(t, j) += bias[j];
    return out;
  };
  tr.q = linear(tr.n1, w.wq, w.bq);
  tr.k = linear(tr.n1, w.wk, w.bk);
  tr.v = linear(tr.n1, w.wv, w.bv);

  double scale = 1.0 / std::sqrt(static_cast<double>(d));
  tr.attention = Mat(t_count, t_count);
  for (size_t i = 0; i < t_count; ++i) {
    double row_max = -std::numeric_limits<double>::infinity();
    std::vector<double> scores(t_count);
    for (size_t j = 0; j < t_count; ++j) {
      double s = 0.0;
      for (size_t kk = 0; kk < d; ++kk) s += tr.q(i, kk) * tr.k(j, kk);
      scores[j] = s * scale;
      row_max = std::max(row_max, scores[j]);
    }
    double denom = 0.0;
    for (size_t j = 0; j < t_count; ++j) {
      scores[j] = std::exp(scores[j] - row_max);
      denom += scores[j];
    }
    for (size_t j = 0; j < t_count; ++j) tr.attention(i, j) = scores[j] / denom;
  }

  tr.ctx = matmul(tr.attention, tr.v);
  Mat attn_out = linear(tr.ctx, w.wo, w.bo);
  tr.h = Mat(t_count, d);
  for (size_t i = 0; i < x.a.size(); ++i) tr.h.a[i] = x.a[i] + attn_out.a[i];

  tr.xhat2 = Mat(t_count, d);
  tr.n2 = Mat(t_count, d);
  tr.inv_std2.resize(t_count);
  for (size_t t = 0; t < t_count; ++t) {
    auto ln = detail::layer_norm_row(&tr.h.a[t * d], d);
    tr.inv_std2[t] = ln.inv_std;
    for (size_t j = 0; j < d; ++j) {
      tr.xhat2(t, j) = ln.xhat[j];
      tr.n2(t, j) = w.ln2_gamma[j] * ln.xhat[j] + w.ln2_beta[j];
    }
  }

  tr.pre_act = linear(tr.n2, w.w1, w.b1);
  tr.act = Mat(t_count, hid);
  for (size_t i = 0; i < tr.pre_act.a.size(); ++i) tr.act.a[i] = detail::gelu(tr.pre_act.a[i]);
  Mat mlp_out = linear(tr.act, w.w2, w.b2);

  tr.out = Mat(t_count, d);
  for (size_t i = 0; i < tr.out.a.size(); ++i) tr.out.a[i] = tr.h.a[i] + mlp_out.a[i];
  return tr;
}

inline Mat encoder_block_forward(const Mat& tokens, const EncoderBlockWeights& w) {
  return encoder_block_forward_traced(tokens, w).out;
}

/// Gradients of sum(output) with respect to every weight tensor; same shapes
/// as EncoderBlockWeights.
using EncoderBlockGradients = EncoderBlockWeights;

/// Hand-derived backward pass for loss = sum of all output entries. Used to
/// verify the forward block against finite differences.
inline EncoderBlockGradients encoder_block_backward_sum(const Mat& x,
                                                        const EncoderBlockWeights& w) {
  EncoderBlockTrace tr = encoder_block_forward_traced(x, w);
  size_t t_count = x.rows;
  size_t d = w.dim();
  size_t hid = w.hidden();
  EncoderBlockGradients g = EncoderBlockWeights::zeros(d, hid);

  Mat d_out(t_count, d, 1.0);  // dL/dOut for L = sum(out)
  Mat d_h = d_out;             // residual branch
  Mat d_mlp = d_out;

  // MLP tail: mlp_out = act . w2 + b2
  for (size_t t = 0; t < t_count; ++t)
    for (size_t j = 0; j < d; ++j) g.b2[j] += d_mlp(t, j);
  {
    Mat act_t = transpose(tr.act);
    g.w2 = matmul(act_t, d_mlp);
  }
  Mat d_act = matmul(d_mlp, transpose(w.w2));

  Mat d_pre(t_count, hid);
  for (size_t i = 0; i < d_pre.a.size(); ++i)
    d_pre.a[i] = d_act.a[i] * detail::gelu_grad(tr.pre_act.a[i]);

  for (size_t t = 0; t < t_count; ++t)
    for (size_t j = 0; j < hid; ++j) g.b1[j] += d_pre(t, j);
  g.w1 = matmul(transpose(tr.n2), d_pre);
  Mat d_n2 = matmul(d_pre, transpose(w.w1));

  // LayerNorm 2 backward (per row), accumulating into d_h.
  for (size_t t = 0; t < t_count; ++t) {
    double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
    std::vector<double> dxhat(d);
    for (size_t j = 0; j < d; ++j) {
      g.ln2_gamma[j] += d_n2(t, j) * tr.xhat2(t, j);
      g.ln2_beta[j] += d_n2(t, j);
      dxhat[j] = d_n2(t, j) * w.ln2_gamma[j];
      mean_dxhat += dxhat[j];
      mean_dxhat_xhat += dxhat[j] * tr.xhat2(t, j);
    }
    mean_dxhat /= static_cast<double>(d);
    mean_dxhat_xhat /= static_cast<double>(d);
    for (size_t j = 0; j < d; ++j)
      d_h(t, j) += tr.inv_std2[t] * (dxhat[j] - mean_dxhat - tr.xhat2(t, j) * mean_dxhat_xhat);
  }

  // Attention head: attn_out = ctx . wo + bo, feeding the first residual.
  Mat d_attn_out = d_h;
  for (size_t t = 0; t < t_count; ++t)
    for (size_t j = 0; j < d; ++j) g.bo[j] += d_attn_out(t, j);
  g.wo = matmul(transpose(tr.ctx), d_attn_out);
  Mat d_ctx = matmul(d_attn_out, transpose(w.wo));

  Mat d_attention = matmul(d_ctx, transpose(tr.v));
  Mat d_v = matmul(transpose(tr.attention), d_ctx);

  // Softmax rows: dS = A .* (dA - (dA . A)) then undo the 1/sqrt(D) scale.
  double scale = 1.0 / std::sqrt(static_cast<double>(d));
  Mat d_scores(t_count, t_count);
  for (size_t i = 0; i < t_count; ++i) {
    double dot = 0.0;
    for (size_t j = 0; j < t_count; ++j) dot += d_attention(i, j) * tr.attention(i, j);
    for (size_t j = 0; j < t_count; ++j)
      d_scores(i, j) = tr.attention(i, j) * (d_attention(i, j) - dot) * scale;
  }
  Mat d_q = matmul(d_scores, tr.k);
  Mat d_k = matmul(transpose(d_scores), tr.q);

  for (size_t t = 0; t < t_count; ++t)
    for (size_t j = 0; j < d; ++j) {
      g.bq[j] += d_q(t, j);
      g.bk[j] += d_k(t, j);
      g.bv[j] += d_v(t, j);
    }
  Mat n1_t = transpose(tr.n1);
  g.wq = matmul(n1_t, d_q);
  g.wk = matmul(n1_t, d_k);
  g.wv = matmul(n1_t, d_v);

  Mat d_n1 = matmul(d_q, transpose(w.wq));
  {
    Mat tmp = matmul(d_k, transpose(w.wk));
    for (size_t i = 0; i < d_n1.a.size(); ++i) d_n1.a[i] += tmp.a[i];
    tmp = matmul(d_v, transpose(w.wv));
    for (size_t i = 0; i < d_n1.a.size(); ++i) d_n1.a[i] += tmp.a[i];
  }

  // LayerNorm 1 backward: only gamma/beta gradients are reported.
  for (size_t t = 0; t < t_count; ++t) {
    for (size_t j = 0; j < d; ++j) {
      g.ln1_gamma[j] += d_n1(t, j) * tr.xhat1(t, j);
      g.ln1_beta[j] += d_n1(t, j);
    }
  }
  return g;
}

}  // namespace geofuse
