// SPDX-License-Identifier: Apache-2.0
#include "fibermon/nn/losses.hpp"

#include "fibermon/error.hpp"

#include <cmath>
#include <string>

namespace fibermon::nn {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": shapes " + shape_string(a.shape()) + " and " +
                     shape_string(b.shape()) + " differ");
  }
}

void require_distribution(const Tensor& probs, std::size_t true_class) {
  if (probs.rank() != 1 || probs.empty()) throw ShapeError("cross_entropy_loss expects a non-empty rank-1 tensor");
  if (true_class >= probs.size()) {
    throw ContractError("cross_entropy_loss: class index " + std::to_string(true_class) + " out of range for " +
                        std::to_string(probs.size()) + " classes");
  }
  probs.require_finite("cross_entropy_loss");
  double total = 0.0;
  for (double p : probs.values()) {
    if (p < 0.0) throw ContractError("cross_entropy_loss: negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ContractError("cross_entropy_loss: probabilities do not sum to 1");
}

}  // namespace

double mse_loss(const Tensor& x, const Tensor& x_hat) {
  require_same_shape(x, x_hat, "mse_loss");
  return (x.vec() - x_hat.vec()).squaredNorm();
}

Tensor mse_loss_backward(const Tensor& x, const Tensor& x_hat) {
  require_same_shape(x, x_hat, "mse_loss_backward");
  Tensor g(x.shape());
  g.vec() = 2.0 * (x_hat.vec() - x.vec());
  return g;
}

double cross_entropy_loss(const Tensor& probs, std::size_t true_class) {
  require_distribution(probs, true_class);
  return -std::log(std::max(probs[true_class], kProbabilityFloor));
}

Tensor cross_entropy_backward(const Tensor& probs, std::size_t true_class) {
  require_distribution(probs, true_class);
  Tensor g(probs.shape());
  const double p = probs[true_class];
  if (p >= kProbabilityFloor) g[true_class] = -1.0 / p;
  return g;
}

double combined_loss(double l1, double l2, double lambda1, double lambda2) {
  if (lambda1 < 0.0 || lambda2 < 0.0) throw ContractError("combined_loss: loss weights must be non-negative");
  return lambda1 * l1 + lambda2 * l2;
}

double mse_batch(const Matrix& target, const Matrix& pred, Eigen::Index batch, Matrix* d_pred) {
  if (target.rows() != pred.rows() || target.cols() != pred.cols()) throw ShapeError("mse_batch: shape mismatch");
  const double inv = 1.0 / static_cast<double>(batch);
  if (d_pred != nullptr) *d_pred = (2.0 * inv) * (pred - target);
  return (pred - target).squaredNorm() * inv;
}

double cross_entropy_batch(const Matrix& probs, const std::vector<std::size_t>& classes, Matrix* d_probs) {
  if (static_cast<std::size_t>(probs.cols()) != classes.size()) throw ShapeError("cross_entropy_batch: batch mismatch");
  const double inv = 1.0 / static_cast<double>(classes.size());
  if (d_probs != nullptr) d_probs->setZero(probs.rows(), probs.cols());
  double total = 0.0;
  for (Eigen::Index b = 0; b < probs.cols(); ++b) {
    const auto c = static_cast<Eigen::Index>(classes[static_cast<std::size_t>(b)]);
    if (c >= probs.rows()) throw ContractError("cross_entropy_batch: class index out of range");
    const double p = probs(c, b);
    total += -std::log(std::max(p, kProbabilityFloor));
    if (d_probs != nullptr && p >= kProbabilityFloor) (*d_probs)(c, b) = -inv / p;
  }
  return total * inv;
}

}  // namespace fibermon::nn
