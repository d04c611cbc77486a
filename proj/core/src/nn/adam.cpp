// SPDX-License-Identifier: Apache-2.0
#include "fibermon/nn/adam.hpp"

#include "fibermon/error.hpp"

#include <cmath>

namespace fibermon::nn {

void AdamConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("adam: learning_rate must be positive");
  if (!(beta1 > 0.0 && beta1 < 1.0)) throw ConfigError("adam: beta1 must lie in (0, 1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw ConfigError("adam: beta2 must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("adam: epsilon must be positive");
}

void adam_step(AdamState& state, std::span<Tensor* const> params, std::span<const Tensor* const> grads) {
  state.config.validate();
  if (params.size() != grads.size()) throw ShapeError("adam_step: parameter and gradient counts differ");
  if (state.first_moment.empty()) {
    for (const Tensor* p : params) {
      state.first_moment.emplace_back(p->shape());
      state.second_moment.emplace_back(p->shape());
    }
  }
  if (state.first_moment.size() != params.size()) throw ShapeError("adam_step: state tracks a different parameter list");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->shape() != grads[i]->shape() || params[i]->shape() != state.first_moment[i].shape()) {
      throw ShapeError("adam_step: shape mismatch for parameter " + std::to_string(i));
    }
  }

  const AdamConfig& c = state.config;
  ++state.step_count;
  const auto t = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto m = state.first_moment[i].vec();
    auto v = state.second_moment[i].vec();
    const auto g = grads[i]->vec();
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseAbs2();
    params[i]->vec().array() -=
        c.learning_rate * (m.array() / correction1) / ((v.array() / correction2).sqrt() + c.epsilon);
  }
}

void adam_step(AdamState& state, Tensor& param, const Tensor& grad) {
  Tensor* p = &param;
  const Tensor* g = &grad;
  adam_step(state, std::span<Tensor* const>(&p, 1), std::span<const Tensor* const>(&g, 1));
}

}  // namespace fibermon::nn
