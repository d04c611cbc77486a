// SPDX-License-Identifier: Apache-2.0
#include "fibermon/nn/activations.hpp"

#include "fibermon/error.hpp"

#include <cmath>
#include <string>

namespace fibermon::nn {

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
    case Activation::softmax: return "softmax";
  }
  return "identity";
}

Activation activation_from_string(std::string_view name) {
  if (name == "identity") return Activation::identity;
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "softmax") return Activation::softmax;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor sigmoid(const Tensor& x) {
  x.require_finite("sigmoid");
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = sigmoid(x[i]);
  return y;
}

Tensor tanh(const Tensor& x) {
  x.require_finite("tanh");
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::tanh(x[i]);
  return y;
}

Tensor relu(const Tensor& x) {
  x.require_finite("relu");
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
  return y;
}

Tensor softmax(const Tensor& x) {
  if (x.empty()) throw ContractError("softmax: empty input");
  if (x.rank() != 1) throw ShapeError("softmax expects a rank-1 tensor, got " + shape_string(x.shape()));
  x.require_finite("softmax");
  Matrix m = to_matrix(x);
  softmax_columns_inplace(m);
  return to_tensor(m);
}

void sigmoid_inplace(Matrix& m) {
  m = m.unaryExpr([](double v) { return sigmoid(v); });
}

void softmax_columns_inplace(Matrix& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    auto col = m.col(c);
    const double peak = col.maxCoeff();
    col = (col.array() - peak).exp();
    col /= col.sum();
  }
}

void apply_activation(Activation a, Matrix& m) {
  switch (a) {
    case Activation::identity: break;
    case Activation::relu: m = m.cwiseMax(0.0); break;
    case Activation::tanh: m = m.array().tanh(); break;
    case Activation::sigmoid: sigmoid_inplace(m); break;
    case Activation::softmax: softmax_columns_inplace(m); break;
  }
}

Matrix activation_backward(Activation a, const Matrix& y, const Matrix& dy) {
  switch (a) {
    case Activation::identity: return dy;
    case Activation::relu: return (y.array() > 0.0).select(dy, 0.0);
    case Activation::tanh: return dy.array() * (1.0 - y.array().square());
    case Activation::sigmoid: return dy.array() * y.array() * (1.0 - y.array());
    case Activation::softmax: {
      // dx = y * (dy - <y, dy>) per column.
      const Eigen::RowVectorXd inner = (y.array() * dy.array()).colwise().sum();
      return y.array() * (dy.rowwise() - inner).array();
    }
  }
  return dy;
}

}  // namespace fibermon::nn
