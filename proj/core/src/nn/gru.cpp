// SPDX-License-Identifier: Apache-2.0
#include "fibermon/nn/gru.hpp"

#include "fibermon/error.hpp"
#include "fibermon/nn/activations.hpp"

#include <cmath>

namespace fibermon::nn {

namespace {

using Index = Eigen::Index;

void fill_uniform(Tensor& t, double limit, Rng& rng) {
  for (auto& v : t.values()) v = rng.uniform(-limit, limit);
}

void require_rows(const Matrix& m, std::size_t rows, const char* what) {
  if (static_cast<std::size_t>(m.rows()) != rows) {
    throw ShapeError(std::string(what) + ": expected " + std::to_string(rows) + " rows, got " +
                     std::to_string(m.rows()));
  }
}

// Gate pre-activations from the input side are supplied by the caller so the
// sequence path can compute them for all steps with one product each.
struct StepOut {
  Matrix z, r, candidate, h;
};

StepOut step(const GruParams& p, const auto& wx_z, const auto& wx_r, const auto& wx_h, const Matrix& h_prev) {
  StepOut o;
  o.z = wx_z;
  o.z.noalias() += p.u_z.mat() * h_prev;
  sigmoid_inplace(o.z);
  o.r = wx_r;
  o.r.noalias() += p.u_r.mat() * h_prev;
  sigmoid_inplace(o.r);
  const Matrix reset_h = o.r.cwiseProduct(h_prev);
  o.candidate = wx_h;
  o.candidate.noalias() += p.u_h.mat() * reset_h;
  o.candidate = o.candidate.array().tanh();
  o.h = o.z.cwiseProduct(h_prev) + (1.0 - o.z.array()).matrix().cwiseProduct(o.candidate);
  return o;
}

struct StepGrads {
  Matrix da_z, da_r, da_h, dh_prev;
};

StepGrads step_backward(const GruParams& p, const auto& h_prev, const auto& z, const auto& r, const auto& cand,
                        const Matrix& dh) {
  StepGrads g;
  const Matrix d_cand = dh.cwiseProduct((1.0 - z.array()).matrix());
  const Matrix d_z = dh.cwiseProduct(h_prev - cand);
  g.da_h = d_cand.array() * (1.0 - cand.array().square());
  const Matrix d_reset_h = p.u_h.mat().transpose() * g.da_h;
  const Matrix d_r = d_reset_h.cwiseProduct(h_prev);
  g.da_z = d_z.array() * z.array() * (1.0 - z.array());
  g.da_r = d_r.array() * r.array() * (1.0 - r.array());
  g.dh_prev = dh.cwiseProduct(z) + d_reset_h.cwiseProduct(r);
  g.dh_prev.noalias() += p.u_z.mat().transpose() * g.da_z;
  g.dh_prev.noalias() += p.u_r.mat().transpose() * g.da_r;
  return g;
}

Matrix input_projection(const Tensor& w, const Tensor& b, const Matrix& x) {
  Matrix out = w.mat() * x;
  out.colwise() += b.vec();
  return out;
}

}  // namespace

GruParams GruParams::zeros(std::size_t in, std::size_t hidden) {
  GruParams p;
  p.w_z = p.w_r = p.w_h = Tensor({hidden, in});
  p.u_z = p.u_r = p.u_h = Tensor({hidden, hidden});
  p.b_z = p.b_r = p.b_h = Tensor({hidden});
  return p;
}

GruParams GruParams::init(std::size_t in, std::size_t hidden, Rng& rng) {
  GruParams p = zeros(in, hidden);
  const double w_limit = 1.0 / std::sqrt(static_cast<double>(in));
  const double u_limit = 1.0 / std::sqrt(static_cast<double>(hidden));
  fill_uniform(p.w_z, w_limit, rng);
  fill_uniform(p.w_r, w_limit, rng);
  fill_uniform(p.w_h, w_limit, rng);
  fill_uniform(p.u_z, u_limit, rng);
  fill_uniform(p.u_r, u_limit, rng);
  fill_uniform(p.u_h, u_limit, rng);
  return p;
}

void GruParams::validate() const {
  const auto check = [](const Tensor& t, Shape want, const char* name) {
    if (t.shape() != want) {
      throw ShapeError(std::string("GRU parameter ") + name + " has shape " + shape_string(t.shape()) +
                       ", expected " + shape_string(want));
    }
  };
  if (w_z.rank() != 2) throw ShapeError("GRU parameter w_z must be rank 2");
  const std::size_t h = hidden();
  const std::size_t i = in();
  check(w_r, {h, i}, "w_r");
  check(w_h, {h, i}, "w_h");
  check(u_z, {h, h}, "u_z");
  check(u_r, {h, h}, "u_r");
  check(u_h, {h, h}, "u_h");
  check(b_z, {h}, "b_z");
  check(b_r, {h}, "b_r");
  check(b_h, {h}, "b_h");
}

Matrix gru_cell_forward(const GruParams& p, const Matrix& x, const Matrix& h_prev, GruCellCache* cache) {
  require_rows(x, p.in(), "gru_cell_forward input");
  require_rows(h_prev, p.hidden(), "gru_cell_forward h_prev");
  if (x.cols() != h_prev.cols()) throw ShapeError("gru_cell_forward: batch sizes of x and h_prev differ");
  StepOut o = step(p, input_projection(p.w_z, p.b_z, x), input_projection(p.w_r, p.b_r, x),
                   input_projection(p.w_h, p.b_h, x), h_prev);
  if (cache != nullptr) {
    cache->x = x;
    cache->h_prev = h_prev;
    cache->z = std::move(o.z);
    cache->r = std::move(o.r);
    cache->candidate = std::move(o.candidate);
  }
  return o.h;
}

GruCellInputGrads gru_cell_backward(const GruParams& p, const GruCellCache& cache, const Matrix& dh, GruParams& grad) {
  if (dh.rows() != cache.z.rows() || dh.cols() != cache.z.cols()) {
    throw ShapeError("gru_cell_backward: upstream gradient shape does not match cache");
  }
  StepGrads g = step_backward(p, cache.h_prev, cache.z, cache.r, cache.candidate, dh);
  grad.w_z.mat().noalias() += g.da_z * cache.x.transpose();
  grad.w_r.mat().noalias() += g.da_r * cache.x.transpose();
  grad.w_h.mat().noalias() += g.da_h * cache.x.transpose();
  grad.u_z.mat().noalias() += g.da_z * cache.h_prev.transpose();
  grad.u_r.mat().noalias() += g.da_r * cache.h_prev.transpose();
  grad.u_h.mat().noalias() += g.da_h * cache.r.cwiseProduct(cache.h_prev).transpose();
  grad.b_z.vec() += g.da_z.rowwise().sum();
  grad.b_r.vec() += g.da_r.rowwise().sum();
  grad.b_h.vec() += g.da_h.rowwise().sum();
  GruCellInputGrads out;
  out.dx = p.w_z.mat().transpose() * g.da_z;
  out.dx.noalias() += p.w_r.mat().transpose() * g.da_r;
  out.dx.noalias() += p.w_h.mat().transpose() * g.da_h;
  out.dh_prev = std::move(g.dh_prev);
  return out;
}

GruCellResult gru_cell_forward(const GruParams& p, const Tensor& x, const Tensor& h_prev) {
  p.validate();
  if (x.rank() != 1 || h_prev.rank() != 1) throw ShapeError("gru_cell_forward expects rank-1 x and h_prev");
  x.require_finite("gru_cell_forward x");
  h_prev.require_finite("gru_cell_forward h_prev");
  GruCellResult res;
  res.h = to_tensor(gru_cell_forward(p, to_matrix(x), to_matrix(h_prev), &res.cache));
  return res;
}

Matrix gru_sequence_forward(const GruParams& p, const Matrix& xs, Index steps, const Matrix* h0,
                            GruSequenceCache* cache) {
  require_rows(xs, p.in(), "gru_sequence_forward input");
  if (steps < 1 || xs.cols() % steps != 0) {
    throw ShapeError("gru_sequence_forward: " + std::to_string(xs.cols()) + " columns do not split into " +
                     std::to_string(steps) + " steps");
  }
  const Index batch = xs.cols() / steps;
  const Index hidden = static_cast<Index>(p.hidden());
  Matrix h = Matrix::Zero(hidden, batch);
  if (h0 != nullptr) {
    if (h0->rows() != hidden || h0->cols() != batch) throw ShapeError("gru_sequence_forward: h0 shape mismatch");
    h = *h0;
  }

  const Matrix wx_z = input_projection(p.w_z, p.b_z, xs);
  const Matrix wx_r = input_projection(p.w_r, p.b_r, xs);
  const Matrix wx_h = input_projection(p.w_h, p.b_h, xs);

  Matrix outputs(hidden, steps * batch);
  if (cache != nullptr) {
    cache->inputs = xs;
    cache->h_prev.resize(hidden, steps * batch);
    cache->z.resize(hidden, steps * batch);
    cache->r.resize(hidden, steps * batch);
    cache->candidate.resize(hidden, steps * batch);
    cache->steps = steps;
    cache->batch = batch;
  }
  for (Index t = 0; t < steps; ++t) {
    const Index c0 = t * batch;
    StepOut o = step(p, wx_z.middleCols(c0, batch), wx_r.middleCols(c0, batch), wx_h.middleCols(c0, batch), h);
    if (cache != nullptr) {
      cache->h_prev.middleCols(c0, batch) = h;
      cache->z.middleCols(c0, batch) = o.z;
      cache->r.middleCols(c0, batch) = o.r;
      cache->candidate.middleCols(c0, batch) = o.candidate;
    }
    outputs.middleCols(c0, batch) = o.h;
    h = std::move(o.h);
  }
  return outputs;
}

GruSequenceInputGrads gru_sequence_backward(const GruParams& p, const GruSequenceCache& cache,
                                            const Matrix& d_outputs, GruParams& grad) {
  const Index steps = cache.steps;
  const Index batch = cache.batch;
  const Index hidden = static_cast<Index>(p.hidden());
  if (d_outputs.rows() != hidden || d_outputs.cols() != steps * batch) {
    throw ShapeError("gru_sequence_backward: upstream gradient shape does not match cache");
  }
  Matrix da_z(hidden, steps * batch);
  Matrix da_r(hidden, steps * batch);
  Matrix da_h(hidden, steps * batch);
  Matrix dh = Matrix::Zero(hidden, batch);
  for (Index t = steps - 1; t >= 0; --t) {
    const Index c0 = t * batch;
    dh += d_outputs.middleCols(c0, batch);
    StepGrads g = step_backward(p, cache.h_prev.middleCols(c0, batch), cache.z.middleCols(c0, batch),
                                cache.r.middleCols(c0, batch), cache.candidate.middleCols(c0, batch), dh);
    da_z.middleCols(c0, batch) = g.da_z;
    da_r.middleCols(c0, batch) = g.da_r;
    da_h.middleCols(c0, batch) = g.da_h;
    dh = std::move(g.dh_prev);
  }

  const auto xs_t = cache.inputs.transpose();
  grad.w_z.mat().noalias() += da_z * xs_t;
  grad.w_r.mat().noalias() += da_r * xs_t;
  grad.w_h.mat().noalias() += da_h * xs_t;
  grad.u_z.mat().noalias() += da_z * cache.h_prev.transpose();
  grad.u_r.mat().noalias() += da_r * cache.h_prev.transpose();
  grad.u_h.mat().noalias() += da_h * cache.r.cwiseProduct(cache.h_prev).transpose();
  grad.b_z.vec() += da_z.rowwise().sum();
  grad.b_r.vec() += da_r.rowwise().sum();
  grad.b_h.vec() += da_h.rowwise().sum();

  GruSequenceInputGrads out;
  out.d_inputs = p.w_z.mat().transpose() * da_z;
  out.d_inputs.noalias() += p.w_r.mat().transpose() * da_r;
  out.d_inputs.noalias() += p.w_h.mat().transpose() * da_h;
  out.d_h0 = std::move(dh);
  return out;
}

Tensor gru_sequence_forward(const GruParams& p, const Tensor& xs, const Tensor* h0) {
  p.validate();
  if (xs.rank() != 2 || xs.shape()[1] != p.in()) {
    throw ShapeError("gru_sequence_forward expects xs [T x " + std::to_string(p.in()) + "], got " +
                     shape_string(xs.shape()));
  }
  if (xs.shape()[0] == 0) throw ShapeError("gru_sequence_forward: empty sequence");
  xs.require_finite("gru_sequence_forward xs");
  const auto steps = static_cast<Index>(xs.shape()[0]);
  Matrix out;
  if (h0 != nullptr) {
    if (h0->shape() != Shape{p.hidden()}) throw ShapeError("gru_sequence_forward: h0 shape mismatch");
    h0->require_finite("gru_sequence_forward h0");
    const Matrix h = to_matrix(*h0);
    out = gru_sequence_forward(p, to_matrix(xs), steps, &h);
  } else {
    out = gru_sequence_forward(p, to_matrix(xs), steps);
  }
  return Tensor({xs.shape()[0], p.hidden()}, std::vector<double>(out.data(), out.data() + out.size()));
}

// ---------------------------------------------------------------------------

BiGruParams BiGruParams::zeros(std::size_t in, std::size_t hidden) {
  return {GruParams::zeros(in, hidden), GruParams::zeros(in, hidden)};
}

BiGruParams BiGruParams::init(std::size_t in, std::size_t hidden, Rng& rng) {
  GruParams fwd = GruParams::init(in, hidden, rng);
  GruParams bwd = GruParams::init(in, hidden, rng);
  return {std::move(fwd), std::move(bwd)};
}

void BiGruParams::validate() const {
  forward.validate();
  backward.validate();
  if (forward.in() != backward.in() || forward.hidden() != backward.hidden()) {
    throw ShapeError("BiGRU directions disagree on input or hidden size");
  }
}

Matrix reverse_steps(const Matrix& m, Index steps) {
  const Index batch = m.cols() / steps;
  Matrix out(m.rows(), m.cols());
  for (Index t = 0; t < steps; ++t) out.middleCols(t * batch, batch) = m.middleCols((steps - 1 - t) * batch, batch);
  return out;
}

Matrix bigru_forward(const BiGruParams& p, const Matrix& xs, Index steps, BiGruCache* cache) {
  if (p.forward.hidden() != p.backward.hidden()) throw ShapeError("bigru_forward: hidden sizes differ");
  Matrix y = gru_sequence_forward(p.forward, xs, steps, nullptr, cache ? &cache->forward : nullptr);
  const Matrix yb = gru_sequence_forward(p.backward, reverse_steps(xs, steps), steps, nullptr,
                                         cache ? &cache->backward : nullptr);
  y += reverse_steps(yb, steps);
  return y;
}

Matrix bigru_backward(const BiGruParams& p, const BiGruCache& cache, const Matrix& d_outputs, BiGruParams& grad) {
  const Index steps = cache.forward.steps;
  GruSequenceInputGrads gf = gru_sequence_backward(p.forward, cache.forward, d_outputs, grad.forward);
  GruSequenceInputGrads gb =
      gru_sequence_backward(p.backward, cache.backward, reverse_steps(d_outputs, steps), grad.backward);
  gf.d_inputs += reverse_steps(gb.d_inputs, steps);
  return gf.d_inputs;
}

Tensor bigru_forward(const GruParams& fwd, const GruParams& bwd, const Tensor& xs) {
  const BiGruParams p{fwd, bwd};
  p.validate();
  if (xs.rank() != 2 || xs.shape()[1] != p.in() || xs.shape()[0] == 0) {
    throw ShapeError("bigru_forward expects xs [T x " + std::to_string(p.in()) + "], got " +
                     shape_string(xs.shape()));
  }
  xs.require_finite("bigru_forward xs");
  const Matrix out = bigru_forward(p, to_matrix(xs), static_cast<Index>(xs.shape()[0]));
  return Tensor({xs.shape()[0], p.hidden()}, std::vector<double>(out.data(), out.data() + out.size()));
}

}  // namespace fibermon::nn
