// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "fibermon/models/ae_model.hpp"
#include "fibermon/models/diag_model.hpp"
#include "fibermon/otdr/dataset.hpp"
#include "fibermon/train_eval/config.hpp"

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace fibermon::train_eval {

struct TrainHistory {
  std::vector<double> train_loss;  // mean per-sample loss seen during each epoch
  std::vector<double> val_loss;    // after each epoch; empty without validation data
  /// Epoch whose parameters were kept (1-based); 0 when no epoch ran.
  std::size_t best_epoch = 0;
  bool stopped_early = false;
};

/// Called after every epoch with its 1-based number.
using EpochCallback = std::function<void(std::size_t epoch, const TrainHistory&)>;

struct AeTrainResult {
  models::AeModel model;
  TrainHistory history;
};

struct DiagTrainResult {
  models::DiagModel model;
  TrainHistory history;
};

/// Minimizes the mean per-sequence reconstruction loss with Adam. With
/// validation samples and patience > 0, training stops once the validation
/// loss has not improved for `patience` epochs and the best parameters are
/// returned. Throws ContractError if any training or validation sample is not
/// normal.
AeTrainResult train_ae(std::span<const otdr::SequenceSample> train, std::span<const otdr::SequenceSample> val,
                       const TrainConfig& config, const EpochCallback& on_epoch = {});
/// Trains on the train split and validates on the normal part of the val split.
AeTrainResult train_ae(const otdr::Dataset& dataset, const TrainConfig& config, const EpochCallback& on_epoch = {});

/// Minimizes lambda1 * cross-entropy + lambda2 * position MSE. Throws
/// ContractError if any sample is normal or lacks a position.
DiagTrainResult train_diag(std::span<const otdr::SequenceSample> train, std::span<const otdr::SequenceSample> val,
                           const TrainConfig& config, const EpochCallback& on_epoch = {});
DiagTrainResult train_diag(const otdr::Dataset& dataset, const TrainConfig& config,
                           const EpochCallback& on_epoch = {});

/// Mean per-sample reconstruction loss.
double ae_loss(const models::AeModel& model, std::span<const otdr::SequenceSample> samples);

struct DiagLoss {
  double classification = 0.0;
  double position = 0.0;
  double total = 0.0;
};
/// Mean per-sample losses of the two tasks and their weighted total.
DiagLoss diag_loss(const models::DiagModel& model, std::span<const otdr::SequenceSample> samples, double lambda1,
                   double lambda2);

}  // namespace fibermon::train_eval
