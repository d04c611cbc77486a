// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fibermon::nn {

using Shape = std::vector<std::size_t>;

/// Column-major matrix used by the batched kernels. Each column is one
/// sample; sequences store step t of a batch of B in columns [t*B, (t+1)*B).
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
/// Tensor storage, aligned like Eigen's own heap buffers so vectorized
/// reductions over it round the same way wherever it is allocated.
using AlignedVector = std::vector<double, Eigen::aligned_allocator<double>>;

/// Dense array of doubles in row-major order.
///
/// A [T x D] tensor has the same memory layout as a column-major D x T
/// matrix, which is how sequences are handed to the batched kernels.
class Tensor {
 public:
  Tensor() = default;
  /// Zero-filled tensor of the given shape.
  explicit Tensor(Shape shape);
  /// Takes ownership of `data`; throws ShapeError if the sizes disagree.
  Tensor(Shape shape, std::vector<double> data);

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor vector(std::initializer_list<double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  /// Rows/cols of a rank-1 (n x 1) or rank-2 tensor.
  std::size_t rows() const;
  std::size_t cols() const;

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  const AlignedVector& storage() const noexcept { return data_; }

  Eigen::Map<RowMatrix> mat();
  Eigen::Map<const RowMatrix> mat() const;
  Eigen::Map<Eigen::VectorXd> vec() { return {data_.data(), static_cast<Eigen::Index>(data_.size())}; }
  Eigen::Map<const Eigen::VectorXd> vec() const {
    return {data_.data(), static_cast<Eigen::Index>(data_.size())};
  }

  void fill(double value);
  bool all_finite() const noexcept;
  /// Throws ContractError naming `what` when any element is NaN or infinite.
  void require_finite(std::string_view what) const;

  bool operator==(const Tensor&) const = default;

 private:
  Shape shape_;
  AlignedVector data_;
};

std::size_t element_count(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Copies a column-major matrix (D x T) into a [T x D] tensor. For a single
/// column the result is the rank-1 tensor [D].
Tensor to_tensor(const Matrix& m);
/// Views a rank-1 [D] tensor as a D x 1 matrix or a rank-2 [T x D] tensor as
/// a D x T matrix.
Matrix to_matrix(const Tensor& t);

}  // namespace fibermon::nn
