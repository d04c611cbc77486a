// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "fibermon/nn/rng.hpp"
#include "fibermon/nn/tensor.hpp"

#include <string>

namespace fibermon::nn {

/// Gated recurrent unit with separate input (W) and recurrent (U) weights:
///
///   z = sigmoid(W_z x + U_z h_prev + b_z)
///   r = sigmoid(W_r x + U_r h_prev + b_r)
///   c = tanh(W_h x + U_h (r * h_prev) + b_h)
///   h = z * h_prev + (1 - z) * c
///
/// The reset gate multiplies h_prev before the recurrent product.
struct GruParams {
  Tensor w_z, w_r, w_h;  // [hidden x in]
  Tensor u_z, u_r, u_h;  // [hidden x hidden]
  Tensor b_z, b_r, b_h;  // [hidden]

  static GruParams zeros(std::size_t in, std::size_t hidden);
  /// Each matrix uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
  static GruParams init(std::size_t in, std::size_t hidden, Rng& rng);

  std::size_t in() const { return w_z.cols(); }
  std::size_t hidden() const { return w_z.rows(); }
  void validate() const;

  template <class F>
  void visit(F&& f) {
    f("w_z", w_z), f("w_r", w_r), f("w_h", w_h);
    f("u_z", u_z), f("u_r", u_r), f("u_h", u_h);
    f("b_z", b_z), f("b_r", b_r), f("b_h", b_h);
  }
  template <class F>
  void visit(F&& f) const {
    f("w_z", w_z), f("w_r", w_r), f("w_h", w_h);
    f("u_z", u_z), f("u_r", u_r), f("u_h", u_h);
    f("b_z", b_z), f("b_r", b_r), f("b_h", b_h);
  }

  bool operator==(const GruParams&) const = default;
};

// ---------------------------------------------------------------------------
// Single step

struct GruCellCache {
  Matrix x, h_prev, z, r, candidate;
};

struct GruCellInputGrads {
  Matrix dx;
  Matrix dh_prev;
};

/// One step over a batch: x [in x B], h_prev [hidden x B] -> h [hidden x B].
Matrix gru_cell_forward(const GruParams& p, const Matrix& x, const Matrix& h_prev, GruCellCache* cache = nullptr);
/// Adds parameter gradients into `grad`; returns gradients w.r.t. x and h_prev.
GruCellInputGrads gru_cell_backward(const GruParams& p, const GruCellCache& cache, const Matrix& dh, GruParams& grad);

struct GruCellResult {
  Tensor h;
  GruCellCache cache;
};
/// Single-sample step on rank-1 tensors.
GruCellResult gru_cell_forward(const GruParams& p, const Tensor& x, const Tensor& h_prev);

// ---------------------------------------------------------------------------
// Sequence

struct GruSequenceCache {
  Matrix inputs;       // [in x T*B]
  Matrix h_prev;       // [hidden x T*B], state entering each step
  Matrix z, r, candidate;
  Eigen::Index steps = 0;
  Eigen::Index batch = 0;
};

struct GruSequenceInputGrads {
  Matrix d_inputs;  // [in x T*B]
  Matrix d_h0;      // [hidden x B]
};

/// Runs the cell left to right over `steps` time steps. `xs` holds step t in
/// columns [t*B, (t+1)*B). `h0` defaults to zeros. Returns all hidden states
/// [hidden x T*B].
Matrix gru_sequence_forward(const GruParams& p, const Matrix& xs, Eigen::Index steps, const Matrix* h0 = nullptr,
                            GruSequenceCache* cache = nullptr);
/// Backpropagation through time. `d_outputs` is the upstream gradient for
/// every output state; parameter gradients are added into `grad`.
GruSequenceInputGrads gru_sequence_backward(const GruParams& p, const GruSequenceCache& cache,
                                            const Matrix& d_outputs, GruParams& grad);

/// Single sequence: xs [T x in] -> [T x hidden]; h0 [hidden] or zeros.
Tensor gru_sequence_forward(const GruParams& p, const Tensor& xs, const Tensor* h0 = nullptr);

// ---------------------------------------------------------------------------
// Bidirectional

/// Two GRUs; the backward one reads the sequence reversed and its outputs are
/// re-reversed so y_t = forward h_t + backward h_t (elementwise sum).
struct BiGruParams {
  GruParams forward;
  GruParams backward;

  static BiGruParams zeros(std::size_t in, std::size_t hidden);
  static BiGruParams init(std::size_t in, std::size_t hidden, Rng& rng);

  std::size_t in() const { return forward.in(); }
  std::size_t hidden() const { return forward.hidden(); }
  void validate() const;

  template <class F>
  void visit(F&& f) {
    forward.visit([&](const std::string& n, Tensor& t) { f("fwd." + n, t); });
    backward.visit([&](const std::string& n, Tensor& t) { f("bwd." + n, t); });
  }
  template <class F>
  void visit(F&& f) const {
    forward.visit([&](const std::string& n, const Tensor& t) { f("fwd." + n, t); });
    backward.visit([&](const std::string& n, const Tensor& t) { f("bwd." + n, t); });
  }

  bool operator==(const BiGruParams&) const = default;
};

struct BiGruCache {
  GruSequenceCache forward;
  GruSequenceCache backward;
};

Matrix bigru_forward(const BiGruParams& p, const Matrix& xs, Eigen::Index steps, BiGruCache* cache = nullptr);
/// Returns d/dxs; parameter gradients are added into `grad`.
Matrix bigru_backward(const BiGruParams& p, const BiGruCache& cache, const Matrix& d_outputs, BiGruParams& grad);

/// Single sequence: xs [T x in] -> [T x hidden].
Tensor bigru_forward(const GruParams& fwd, const GruParams& bwd, const Tensor& xs);

/// Reverses the order of the time blocks of a [D x T*B] matrix.
Matrix reverse_steps(const Matrix& m, Eigen::Index steps);

}  // namespace fibermon::nn
