// SPDX-License-Identifier: Apache-2.0
#include "fibermon/nn/tensor.hpp"

#include "fibermon/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace fibermon::nn {

std::size_t element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) s += " x ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)), data_(element_count(shape_), 0.0) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(data.begin(), data.end()) {
  if (element_count(shape_) != data_.size()) {
    throw ShapeError("tensor shape " + shape_string(shape_) + " does not match " +
                     std::to_string(data_.size()) + " elements");
  }
}

Tensor Tensor::vector(std::initializer_list<double> values) {
  return Tensor({values.size()}, std::vector<double>(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values) {
  return Tensor({rows, cols}, std::vector<double>(values));
}

std::size_t Tensor::rows() const {
  if (shape_.size() == 1) return shape_[0];
  if (shape_.size() == 2) return shape_[0];
  throw ShapeError("rows() needs a rank-1 or rank-2 tensor, got " + shape_string(shape_));
}

std::size_t Tensor::cols() const {
  if (shape_.size() == 1) return 1;
  if (shape_.size() == 2) return shape_[1];
  throw ShapeError("cols() needs a rank-1 or rank-2 tensor, got " + shape_string(shape_));
}

Eigen::Map<RowMatrix> Tensor::mat() {
  return {data_.data(), static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols())};
}

Eigen::Map<const RowMatrix> Tensor::mat() const {
  return {data_.data(), static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols())};
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void Tensor::require_finite(std::string_view what) const {
  if (!all_finite()) throw ContractError(std::string(what) + ": non-finite value in tensor");
}

Tensor to_tensor(const Matrix& m) {
  std::vector<double> data(m.data(), m.data() + m.size());
  if (m.cols() == 1) return Tensor({static_cast<std::size_t>(m.rows())}, std::move(data));
  return Tensor({static_cast<std::size_t>(m.cols()), static_cast<std::size_t>(m.rows())}, std::move(data));
}

Matrix to_matrix(const Tensor& t) {
  if (t.rank() == 1) return Eigen::Map<const Matrix>(t.values().data(), static_cast<Eigen::Index>(t.size()), 1);
  if (t.rank() == 2) {
    return Eigen::Map<const Matrix>(t.values().data(), static_cast<Eigen::Index>(t.shape()[1]),
                                    static_cast<Eigen::Index>(t.shape()[0]));
  }
  throw ShapeError("to_matrix needs a rank-1 or rank-2 tensor, got " + shape_string(t.shape()));
}

}  // namespace fibermon::nn
