// SPDX-License-Identifier: Apache-2.0
#include "fibermon/train_eval/evaluation.hpp"

#include "fibermon/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fibermon::train_eval {

using otdr::SequenceSample;

namespace {

std::vector<bool> fault_flags(std::span<const SequenceSample> samples) {
  std::vector<bool> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.is_fault());
  return out;
}

}  // namespace

std::optional<std::size_t> snr_bin_index(double snr_db) {
  if (!(snr_db >= 0.0) || snr_db > kSnrBinWidthDb * kSnrBinCount) return std::nullopt;
  const auto bin = static_cast<std::size_t>(snr_db / kSnrBinWidthDb);
  return std::min(bin, kSnrBinCount - 1);
}

double snr_bin_low(std::size_t bin) { return kSnrBinWidthDb * static_cast<double>(bin); }
double snr_bin_high(std::size_t bin) { return kSnrBinWidthDb * static_cast<double>(bin + 1); }

ThresholdSweep calibrate(models::AeModel& model, std::span<const SequenceSample> validation) {
  const std::vector<double> scores = models::anomaly_scores(model, validation);
  ThresholdSweep sweep = sweep_threshold(scores, fault_flags(validation));
  model.meta.theta = sweep.theta;
  return sweep;
}

DetectionReport detection_report(std::span<const double> scores, const std::vector<bool>& is_fault, double theta) {
  if (!(theta >= 0.0)) throw ContractError("detection threshold must be non-negative");
  DetectionReport r;
  r.theta = theta;
  r.counts = count_detections(scores, is_fault, theta);
  r.metrics = detection_metrics(r.counts);
  r.roc = roc_and_auc(scores, is_fault);
  return r;
}

DetectionReport evaluate_detection(const models::AeModel& model, std::span<const SequenceSample> test) {
  if (!model.meta.theta) throw ContractError("autoencoder has no detection threshold; calibrate first");
  const std::vector<double> scores = models::anomaly_scores(model, test);
  return detection_report(scores, fault_flags(test), *model.meta.theta);
}

std::vector<DiagPrediction> predict_diag(const models::DiagModel& model, std::span<const SequenceSample> samples) {
  std::vector<DiagPrediction> out;
  out.reserve(samples.size());
  for (const models::Diagnosis& d : models::diagnose_all(model, samples)) out.push_back({d.label, d.position_index});
  return out;
}

DiagReport diag_report(std::span<const SequenceSample> samples, std::span<const DiagPrediction> predictions) {
  if (samples.size() != predictions.size()) throw ContractError("diag_report: samples and predictions differ in length");
  DiagReport r;
  r.count = samples.size();
  if (samples.empty()) return r;

  struct Acc {
    std::size_t count = 0;
    std::size_t correct = 0;
    double sq = 0.0;
  };
  Acc all;
  std::array<Acc, kSnrBinCount> bins{};
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const SequenceSample& s = samples[i];
    if (!s.is_fault() || !s.position_index) {
      throw ContractError("diagnosis evaluation sample " + std::to_string(i) + " is not a faulty sample with a position");
    }
    const std::size_t t = otdr::fault_class_index(s.label);
    const std::size_t p = otdr::fault_class_index(predictions[i].label);
    ++r.confusion[t][p];
    const double err = static_cast<double>(predictions[i].position_index) - static_cast<double>(*s.position_index);
    const auto add = [&](Acc& a) {
      ++a.count;
      a.correct += t == p ? 1 : 0;
      a.sq += err * err;
    };
    add(all);
    if (const auto b = snr_bin_index(s.snr_db)) add(bins[*b]);
  }
  r.accuracy = static_cast<double>(all.correct) / static_cast<double>(all.count);
  r.rmse_index = std::sqrt(all.sq / static_cast<double>(all.count));
  r.rmse_m = r.rmse_index * r.meters_per_sample;
  for (std::size_t c = 0; c < otdr::kFaultClassCount; ++c) {
    std::size_t row = 0;
    for (std::size_t v : r.confusion[c]) row += v;
    if (row > 0) r.class_accuracy[c] = static_cast<double>(r.confusion[c][c]) / static_cast<double>(row);
  }
  for (std::size_t b = 0; b < kSnrBinCount; ++b) {
    if (bins[b].count == 0) continue;
    DiagBinRow row;
    row.bin = b;
    row.count = bins[b].count;
    row.accuracy = static_cast<double>(bins[b].correct) / static_cast<double>(bins[b].count);
    row.rmse_index = std::sqrt(bins[b].sq / static_cast<double>(bins[b].count));
    row.rmse_m = row.rmse_index * r.meters_per_sample;
    r.bins.push_back(row);
  }
  return r;
}

DiagReport evaluate_diag(const models::DiagModel& model, std::span<const SequenceSample> test) {
  const std::vector<DiagPrediction> predictions = predict_diag(model, test);
  return diag_report(test, predictions);
}

}  // namespace fibermon::train_eval
