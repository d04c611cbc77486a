// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "fibermon/nn/tensor.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace fibermon::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
  bool operator==(const AdamConfig&) const = default;
};

/// Moment estimates for an ordered list of parameter tensors. The moments are
/// created on the first step and must keep mirroring the parameter shapes.
struct AdamState {
  AdamConfig config;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  std::uint64_t step_count = 0;
};

/// One bias-corrected Adam update of every parameter; step_count advances by
/// exactly one per call.
void adam_step(AdamState& state, std::span<Tensor* const> params, std::span<const Tensor* const> grads);
void adam_step(AdamState& state, Tensor& param, const Tensor& grad);

}  // namespace fibermon::nn
