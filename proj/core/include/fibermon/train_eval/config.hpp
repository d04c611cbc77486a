// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "fibermon/models/ae_model.hpp"
#include "fibermon/models/diag_model.hpp"
#include "fibermon/nn/adam.hpp"

#include <cstdint>
#include <string>
#include <string_view>

namespace fibermon::train_eval {

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 64;
  nn::AdamConfig adam{};
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  std::uint64_t seed = 0;
  /// Epochs without a new best validation loss before stopping; 0 disables.
  std::size_t patience = 10;
  /// Rescale each batch gradient to this global L2 norm when larger; 0 disables.
  double clip_norm = 0.0;
  std::size_t hidden1 = 64;
  std::size_t hidden2 = 32;
  std::size_t attention = 32;

  /// Throws ConfigError.
  void validate() const;
  models::AeArchitecture ae_architecture() const { return {hidden1, hidden2}; }
  models::DiagArchitecture diag_architecture() const { return {hidden1, hidden2, attention}; }

  bool operator==(const TrainConfig&) const = default;
};

/// Missing keys keep their defaults; unknown keys are rejected. Keys:
/// epochs, batch_size, learning_rate, beta1, beta2, epsilon, lambda1, lambda2,
/// seed, patience, clip_norm, hidden1, hidden2, attention.
TrainConfig train_config_from_json(std::string_view text);
std::string to_json(const TrainConfig& config);

}  // namespace fibermon::train_eval
