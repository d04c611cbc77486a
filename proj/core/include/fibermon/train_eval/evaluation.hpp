// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "fibermon/models/ae_model.hpp"
#include "fibermon/models/diag_model.hpp"
#include "fibermon/otdr/fiber.hpp"
#include "fibermon/train_eval/metrics.hpp"

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace fibermon::train_eval {

/// SNR bins [0,5), [5,10), ..., [25,30]; 30 dB itself falls in the last bin.
inline constexpr double kSnrBinWidthDb = 5.0;
inline constexpr std::size_t kSnrBinCount = 6;
/// Bin of an SNR value, or nothing outside [0, 30].
std::optional<std::size_t> snr_bin_index(double snr_db);
double snr_bin_low(std::size_t bin);
double snr_bin_high(std::size_t bin);

/// Scores every sample, sets model.meta.theta to the F1-optimal threshold
/// and returns the sweep. Throws ContractError for a single-class set.
ThresholdSweep calibrate(models::AeModel& model, std::span<const otdr::SequenceSample> validation);

struct DetectionReport {
  double theta = 0.0;
  DetectionCounts counts;
  DetectionMetrics metrics;
  RocCurve roc;
};

/// Detection metrics and ROC of `scores` at `theta` (faulty iff score > theta).
DetectionReport detection_report(std::span<const double> scores, const std::vector<bool>& is_fault, double theta);
/// Throws ContractError when the model has no calibrated threshold.
DetectionReport evaluate_detection(const models::AeModel& model, std::span<const otdr::SequenceSample> test);

struct DiagPrediction {
  otdr::Label label = otdr::Label::fiber_cut;
  std::size_t position_index = 0;
};

struct DiagBinRow {
  std::size_t bin = 0;
  std::size_t count = 0;
  double accuracy = 0.0;
  double rmse_index = 0.0;
  double rmse_m = 0.0;
};

using ConfusionMatrix = std::array<std::array<std::size_t, otdr::kFaultClassCount>, otdr::kFaultClassCount>;

struct DiagReport {
  /// confusion[true class][predicted class], classes in fault_class_index order.
  ConfusionMatrix confusion{};
  std::size_t count = 0;
  double accuracy = 0.0;
  /// Recall of each class; absent for classes missing from the test set.
  std::array<std::optional<double>, otdr::kFaultClassCount> class_accuracy{};
  double rmse_index = 0.0;
  double rmse_m = 0.0;
  /// Non-empty SNR bins only, ascending.
  std::vector<DiagBinRow> bins;
  double meters_per_sample = otdr::kMetersPerSample;
};

/// Aggregates predictions for labeled faulty samples. RMSE covers every
/// sample, whether or not its class was predicted correctly.
DiagReport diag_report(std::span<const otdr::SequenceSample> samples, std::span<const DiagPrediction> predictions);
DiagReport evaluate_diag(const models::DiagModel& model, std::span<const otdr::SequenceSample> test);
std::vector<DiagPrediction> predict_diag(const models::DiagModel& model, std::span<const otdr::SequenceSample> samples);

struct EvalReport {
  std::optional<ThresholdSweep> sweep;
  std::optional<DetectionReport> detection;
  std::optional<DiagReport> diagnosis;
};

}  // namespace fibermon::train_eval
