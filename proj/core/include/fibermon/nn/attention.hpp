// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "fibermon/nn/rng.hpp"
#include "fibermon/nn/tensor.hpp"

namespace fibermon::nn {

/// Additive attention pooling over time:
///   e_i = tanh(W_h h_i),  alpha = softmax_i(w . e_i),  c = sum_i alpha_i h_i
struct AttentionParams {
  Tensor w_h;  // [attn x hidden]
  Tensor w;    // [attn]

  static AttentionParams zeros(std::size_t hidden, std::size_t attn);
  static AttentionParams init(std::size_t hidden, std::size_t attn, Rng& rng);

  std::size_t hidden() const { return w_h.cols(); }
  std::size_t attn() const { return w_h.rows(); }
  void validate() const;

  template <class F>
  void visit(F&& f) {
    f("w_h", w_h);
    f("w", w);
  }
  template <class F>
  void visit(F&& f) const {
    f("w_h", w_h);
    f("w", w);
  }

  bool operator==(const AttentionParams&) const = default;
};

struct AttentionCache {
  Matrix hs;      // [hidden x T*B]
  Matrix e;       // [attn x T*B]
  Matrix alphas;  // [T x B]
  Eigen::Index steps = 0;
  Eigen::Index batch = 0;
};

/// Batched pooling of `hs` [hidden x T*B] into context vectors [hidden x B].
/// When `alphas` is given it receives the weights [T x B].
Matrix attention_forward(const AttentionParams& p, const Matrix& hs, Eigen::Index steps, AttentionCache* cache = nullptr,
                         Matrix* alphas = nullptr);
/// Returns d/dhs; parameter gradients are added into `grad`.
Matrix attention_backward(const AttentionParams& p, const AttentionCache& cache, const Matrix& dc,
                          AttentionParams& grad);

struct AttentionResult {
  Tensor context;  // [hidden]
  Tensor alphas;   // [T]
  AttentionCache cache;
};
/// Single sequence: hs [T x hidden].
AttentionResult attention_forward(const AttentionParams& p, const Tensor& hs);

}  // namespace fibermon::nn
