// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "fibermon/nn/activations.hpp"
#include "fibermon/nn/rng.hpp"
#include "fibermon/nn/tensor.hpp"

namespace fibermon::nn {

/// Affine map y = act(W x + b) with W [out x in], b [out].
struct DenseParams {
  Tensor weight;
  Tensor bias;

  static DenseParams zeros(std::size_t in, std::size_t out);
  /// Weights uniform in [-1/sqrt(in), 1/sqrt(in)], bias zero.
  static DenseParams init(std::size_t in, std::size_t out, Rng& rng);

  std::size_t in() const { return weight.cols(); }
  std::size_t out() const { return weight.rows(); }
  void validate() const;

  template <class F>
  void visit(F&& f) {
    f("weight", weight);
    f("bias", bias);
  }
  template <class F>
  void visit(F&& f) const {
    f("weight", weight);
    f("bias", bias);
  }

  bool operator==(const DenseParams&) const = default;
};

struct DenseCache {
  Matrix input;
  Matrix output;
  Activation activation = Activation::identity;
};

/// Batched forward over the columns of `x` [in x B]. Fills `cache` when given.
Matrix dense_forward(const DenseParams& p, const Matrix& x, Activation act, DenseCache* cache = nullptr);
/// Adds parameter gradients into `grad` and returns d/dx.
Matrix dense_backward(const DenseParams& p, const DenseCache& cache, const Matrix& dy, DenseParams& grad);

/// Single-sample form on a rank-1 tensor.
Tensor dense_forward(const DenseParams& p, const Tensor& x, Activation act);

}  // namespace fibermon::nn
