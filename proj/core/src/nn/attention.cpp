// SPDX-License-Identifier: Apache-2.0
#include "fibermon/nn/attention.hpp"

#include "fibermon/error.hpp"
#include "fibermon/nn/activations.hpp"

#include <cmath>

namespace fibermon::nn {

using Index = Eigen::Index;

AttentionParams AttentionParams::zeros(std::size_t hidden, std::size_t attn) {
  return {Tensor({attn, hidden}), Tensor({attn})};
}

AttentionParams AttentionParams::init(std::size_t hidden, std::size_t attn, Rng& rng) {
  AttentionParams p = zeros(hidden, attn);
  const double lim_h = 1.0 / std::sqrt(static_cast<double>(hidden));
  const double lim_w = 1.0 / std::sqrt(static_cast<double>(attn));
  for (auto& v : p.w_h.values()) v = rng.uniform(-lim_h, lim_h);
  for (auto& v : p.w.values()) v = rng.uniform(-lim_w, lim_w);
  return p;
}

void AttentionParams::validate() const {
  if (w_h.rank() != 2 || w.rank() != 1 || w.size() != w_h.rows()) {
    throw ShapeError("attention parameters inconsistent: w_h " + shape_string(w_h.shape()) + ", w " +
                     shape_string(w.shape()));
  }
}

Matrix attention_forward(const AttentionParams& p, const Matrix& hs, Index steps, AttentionCache* cache,
                         Matrix* alphas_out) {
  if (static_cast<std::size_t>(hs.rows()) != p.hidden()) {
    throw ShapeError("attention_forward: states have " + std::to_string(hs.rows()) + " rows, expected " +
                     std::to_string(p.hidden()));
  }
  if (steps < 1 || hs.cols() % steps != 0) throw ShapeError("attention_forward: bad step count");
  const Index batch = hs.cols() / steps;

  Matrix e = p.w_h.mat() * hs;
  e = e.array().tanh();
  const Eigen::RowVectorXd scores = p.w.vec().transpose() * e;
  // Reshape [1 x T*B] into [T x B]: step t of sample b lives at t*B + b.
  Matrix alphas = Eigen::Map<const RowMatrix>(scores.data(), steps, batch);
  softmax_columns_inplace(alphas);

  Matrix context = Matrix::Zero(hs.rows(), batch);
  for (Index t = 0; t < steps; ++t) {
    context += (hs.middleCols(t * batch, batch).array().rowwise() * alphas.row(t).array()).matrix();
  }
  if (cache != nullptr) {
    cache->hs = hs;
    cache->e = std::move(e);
    cache->alphas = alphas;
    cache->steps = steps;
    cache->batch = batch;
  }
  if (alphas_out != nullptr) *alphas_out = std::move(alphas);
  return context;
}

Matrix attention_backward(const AttentionParams& p, const AttentionCache& cache, const Matrix& dc,
                          AttentionParams& grad) {
  const Index steps = cache.steps;
  const Index batch = cache.batch;
  if (dc.rows() != cache.hs.rows() || dc.cols() != batch) {
    throw ShapeError("attention_backward: upstream gradient shape does not match cache");
  }
  Matrix d_hs(cache.hs.rows(), cache.hs.cols());
  Matrix d_alpha(steps, batch);
  for (Index t = 0; t < steps; ++t) {
    const auto h_t = cache.hs.middleCols(t * batch, batch);
    d_alpha.row(t) = (h_t.array() * dc.array()).colwise().sum();
    d_hs.middleCols(t * batch, batch) = (dc.array().rowwise() * cache.alphas.row(t).array()).matrix();
  }
  // Softmax Jacobian, column by column.
  const Eigen::RowVectorXd inner = (cache.alphas.array() * d_alpha.array()).colwise().sum();
  const Matrix d_scores = cache.alphas.array() * (d_alpha.rowwise() - inner).array();
  RowMatrix d_scores_rm = d_scores;
  const Eigen::Map<const Eigen::RowVectorXd> d_flat(d_scores_rm.data(), steps * batch);

  grad.w.vec().noalias() += cache.e * d_flat.transpose();
  const Matrix d_pre = (p.w.vec() * d_flat).array() * (1.0 - cache.e.array().square());
  grad.w_h.mat().noalias() += d_pre * cache.hs.transpose();
  d_hs.noalias() += p.w_h.mat().transpose() * d_pre;
  return d_hs;
}

AttentionResult attention_forward(const AttentionParams& p, const Tensor& hs) {
  p.validate();
  if (hs.rank() != 2 || hs.shape()[1] != p.hidden() || hs.shape()[0] == 0) {
    throw ShapeError("attention_forward expects hs [T x " + std::to_string(p.hidden()) + "], got " +
                     shape_string(hs.shape()));
  }
  hs.require_finite("attention_forward hs");
  AttentionResult res;
  Matrix alphas;
  const Matrix c = attention_forward(p, to_matrix(hs), static_cast<Index>(hs.shape()[0]), &res.cache, &alphas);
  res.context = to_tensor(c);
  res.alphas = to_tensor(alphas);
  return res;
}

}  // namespace fibermon::nn
