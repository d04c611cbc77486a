// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fibermon::train_eval {

/// Positive = faulty (anomalous).
struct DetectionCounts {
  std::size_t tp = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t total() const { return tp + tn + fp + fn; }
  bool operator==(const DetectionCounts&) const = default;
};

/// Predicts faulty iff score > theta.
DetectionCounts count_detections(std::span<const double> scores, const std::vector<bool>& is_fault, double theta);

struct DetectionMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  /// Set when a ratio had a zero denominator and was defined as 0.
  bool degenerate = false;
};

DetectionMetrics detection_metrics(const DetectionCounts& counts);

struct ThresholdPoint {
  double theta = 0.0;
  DetectionCounts counts;
  DetectionMetrics metrics;
};

struct ThresholdSweep {
  double theta = 0.0;
  std::size_t best_index = 0;       // into curve
  std::vector<ThresholdPoint> curve;  // ascending theta
};

/// Candidates: midpoints between consecutive distinct scores, half the
/// smallest score and the largest score. Returns the candidate with the
/// highest F1, the smallest theta among ties. Throws ContractError unless
/// both classes are present.
ThresholdSweep sweep_threshold(std::span<const double> scores, const std::vector<bool>& is_fault);

struct RocPoint {
  double false_positive_rate = 0.0;
  double true_positive_rate = 0.0;
  double threshold = 0.0;  // predict faulty iff score >= threshold
};

struct RocCurve {
  /// Descending threshold: (0, 0) at +inf, one point per distinct score, then
  /// (1, 1) at -inf.
  std::vector<RocPoint> points;
  double auc = 0.0;
};

/// Throws ContractError unless both classes are present.
RocCurve roc_and_auc(std::span<const double> scores, const std::vector<bool>& is_fault);

/// P(score of a random fault > score of a random normal), ties counted half.
double mann_whitney_auc(std::span<const double> scores, const std::vector<bool>& is_fault);

/// Spearman rank correlation with average ranks for ties. Returns 0 when
/// either side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace fibermon::train_eval
