// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "fibermon/nn/tensor.hpp"

#include <cstddef>

namespace fibermon::nn {

/// Probabilities below this are clamped before taking the log.
inline constexpr double kProbabilityFloor = 1e-12;

/// Sum of squared differences over one sequence.
double mse_loss(const Tensor& x, const Tensor& x_hat);
/// d mse_loss / d x_hat.
Tensor mse_loss_backward(const Tensor& x, const Tensor& x_hat);

/// -ln(max(probs[true_class], 1e-12)). `probs` must sum to 1 within 1e-9.
double cross_entropy_loss(const Tensor& probs, std::size_t true_class);
/// d cross_entropy_loss / d probs. Zero where the clamp is active.
Tensor cross_entropy_backward(const Tensor& probs, std::size_t true_class);

/// lambda1 * l1 + lambda2 * l2. Throws ContractError for negative weights.
double combined_loss(double l1, double l2, double lambda1, double lambda2);

// Batched forms. A batch loss is the mean over samples (columns or column
// groups) of the per-sample loss; the returned gradients are of that mean.

/// `target`/`pred` are [D x T*B] sequence matrices; `batch` = B.
double mse_batch(const Matrix& target, const Matrix& pred, Eigen::Index batch, Matrix* d_pred = nullptr);
/// `probs` [C x B]; `classes[b]` is the true class of column b.
double cross_entropy_batch(const Matrix& probs, const std::vector<std::size_t>& classes, Matrix* d_probs = nullptr);

}  // namespace fibermon::nn
