// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "fibermon/nn/tensor.hpp"

#include <string_view>

namespace fibermon::nn {

enum class Activation { identity, relu, tanh, sigmoid, softmax };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view name);

/// Elementwise logistic function. Throws ContractError on non-finite input.
Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor relu(const Tensor& x);
/// Softmax over a rank-1 tensor, max-subtracted. Throws on empty input.
Tensor softmax(const Tensor& x);

double sigmoid(double x);

// Batched forms. Softmax normalizes each column independently.
void sigmoid_inplace(Matrix& m);
void softmax_columns_inplace(Matrix& m);
void apply_activation(Activation a, Matrix& m);

/// Gradient through an activation given its *output* y and upstream dy.
Matrix activation_backward(Activation a, const Matrix& y, const Matrix& dy);

}  // namespace fibermon::nn
