// SPDX-License-Identifier: Apache-2.0
#include "fibermon/nn/dense.hpp"

#include "fibermon/error.hpp"

#include <cmath>

namespace fibermon::nn {

namespace {

void fill_uniform(Tensor& t, double limit, Rng& rng) {
  for (auto& v : t.values()) v = rng.uniform(-limit, limit);
}

}  // namespace

DenseParams DenseParams::zeros(std::size_t in, std::size_t out) {
  return {Tensor({out, in}), Tensor({out})};
}

DenseParams DenseParams::init(std::size_t in, std::size_t out, Rng& rng) {
  DenseParams p = zeros(in, out);
  fill_uniform(p.weight, 1.0 / std::sqrt(static_cast<double>(in)), rng);
  return p;
}

void DenseParams::validate() const {
  if (weight.rank() != 2 || bias.rank() != 1 || bias.size() != weight.rows()) {
    throw ShapeError("dense parameters inconsistent: weight " + shape_string(weight.shape()) + ", bias " +
                     shape_string(bias.shape()));
  }
}

Matrix dense_forward(const DenseParams& p, const Matrix& x, Activation act, DenseCache* cache) {
  if (static_cast<std::size_t>(x.rows()) != p.in()) {
    throw ShapeError("dense_forward: input has " + std::to_string(x.rows()) + " rows, layer expects " +
                     std::to_string(p.in()));
  }
  Matrix y = p.weight.mat() * x;
  y.colwise() += p.bias.vec();
  apply_activation(act, y);
  if (cache != nullptr) {
    cache->input = x;
    cache->output = y;
    cache->activation = act;
  }
  return y;
}

Matrix dense_backward(const DenseParams& p, const DenseCache& cache, const Matrix& dy, DenseParams& grad) {
  if (dy.rows() != cache.output.rows() || dy.cols() != cache.output.cols()) {
    throw ShapeError("dense_backward: upstream gradient shape does not match cached output");
  }
  const Matrix da = activation_backward(cache.activation, cache.output, dy);
  grad.weight.mat().noalias() += da * cache.input.transpose();
  grad.bias.vec() += da.rowwise().sum();
  return p.weight.mat().transpose() * da;
}

Tensor dense_forward(const DenseParams& p, const Tensor& x, Activation act) {
  p.validate();
  if (x.rank() != 1) throw ShapeError("dense_forward expects a rank-1 input, got " + shape_string(x.shape()));
  x.require_finite("dense_forward");
  return to_tensor(dense_forward(p, to_matrix(x), act));
}

}  // namespace fibermon::nn
