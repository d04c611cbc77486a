// SPDX-License-Identifier: Apache-2.0
#include "fibermon/train_eval/metrics.hpp"

#include "fibermon/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace fibermon::train_eval {

namespace {

void check_inputs(std::span<const double> scores, const std::vector<bool>& is_fault, const char* what) {
  if (scores.size() != is_fault.size()) throw ContractError(std::string(what) + ": scores and labels differ in length");
  for (double s : scores) {
    if (!std::isfinite(s)) throw ContractError(std::string(what) + ": non-finite score");
  }
}

void require_both_classes(const std::vector<bool>& is_fault, const char* what) {
  const auto pos = static_cast<std::size_t>(std::count(is_fault.begin(), is_fault.end(), true));
  if (pos == 0 || pos == is_fault.size()) {
    throw ContractError(std::string(what) + " needs both normal and faulty samples");
  }
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = r;
    i = j + 1;
  }
  return rank;
}

}  // namespace

DetectionCounts count_detections(std::span<const double> scores, const std::vector<bool>& is_fault, double theta) {
  check_inputs(scores, is_fault, "count_detections");
  DetectionCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] > theta;
    if (is_fault[i]) {
      predicted ? ++c.tp : ++c.fn;
    } else {
      predicted ? ++c.fp : ++c.tn;
    }
  }
  return c;
}

DetectionMetrics detection_metrics(const DetectionCounts& c) {
  DetectionMetrics m;
  if (c.tp + c.fp > 0) {
    m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  } else {
    m.degenerate = true;
  }
  if (c.tp + c.fn > 0) {
    m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  } else {
    m.degenerate = true;
  }
  if (m.precision + m.recall > 0.0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  } else {
    m.degenerate = true;
  }
  return m;
}

ThresholdSweep sweep_threshold(std::span<const double> scores, const std::vector<bool>& is_fault) {
  check_inputs(scores, is_fault, "sweep_threshold");
  require_both_classes(is_fault, "threshold calibration");
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  std::vector<double> candidates;
  candidates.reserve(sorted.size() + 1);
  candidates.push_back(0.5 * sorted.front());
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) candidates.push_back(0.5 * (sorted[i] + sorted[i + 1]));
  candidates.push_back(sorted.back());
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  // Sweep ascending theta over scores sorted ascending: everything above
  // theta is predicted faulty.
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  const auto positives = static_cast<std::size_t>(std::count(is_fault.begin(), is_fault.end(), true));
  const std::size_t negatives = scores.size() - positives;

  ThresholdSweep out;
  out.curve.reserve(candidates.size());
  std::size_t at_or_below = 0;  // samples with score <= theta
  std::size_t fn = 0;
  std::size_t tn = 0;
  for (double theta : candidates) {
    while (at_or_below < idx.size() && scores[idx[at_or_below]] <= theta) {
      is_fault[idx[at_or_below]] ? ++fn : ++tn;
      ++at_or_below;
    }
    ThresholdPoint p;
    p.theta = theta;
    p.counts = {positives - fn, tn, negatives - tn, fn};
    p.metrics = detection_metrics(p.counts);
    out.curve.push_back(p);
  }
  for (std::size_t i = 1; i < out.curve.size(); ++i) {
    if (out.curve[i].metrics.f1 > out.curve[out.best_index].metrics.f1) out.best_index = i;
  }
  out.theta = out.curve[out.best_index].theta;
  return out;
}

RocCurve roc_and_auc(std::span<const double> scores, const std::vector<bool>& is_fault) {
  check_inputs(scores, is_fault, "roc_and_auc");
  require_both_classes(is_fault, "ROC analysis");
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  const auto positives = static_cast<double>(std::count(is_fault.begin(), is_fault.end(), true));
  const double negatives = static_cast<double>(scores.size()) - positives;

  RocCurve roc;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  roc.points.push_back({0.0, 0.0, kInf});
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < idx.size();) {
    const double thr = scores[idx[i]];
    while (i < idx.size() && scores[idx[i]] == thr) {
      is_fault[idx[i]] ? ++tp : ++fp;
      ++i;
    }
    roc.points.push_back({static_cast<double>(fp) / negatives, static_cast<double>(tp) / positives, thr});
  }
  roc.points.push_back({1.0, 1.0, -kInf});
  for (std::size_t i = 1; i < roc.points.size(); ++i) {
    const RocPoint& a = roc.points[i - 1];
    const RocPoint& b = roc.points[i];
    roc.auc += (b.false_positive_rate - a.false_positive_rate) * 0.5 * (a.true_positive_rate + b.true_positive_rate);
  }
  return roc;
}

double mann_whitney_auc(std::span<const double> scores, const std::vector<bool>& is_fault) {
  check_inputs(scores, is_fault, "mann_whitney_auc");
  require_both_classes(is_fault, "Mann-Whitney statistic");
  const std::vector<double> rank = average_ranks(scores);
  double rank_sum = 0.0;
  double positives = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (is_fault[i]) {
      rank_sum += rank[i];
      positives += 1.0;
    }
  }
  const double negatives = static_cast<double>(scores.size()) - positives;
  return (rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ContractError("spearman: inputs differ in length");
  if (x.size() < 2) return 0.0;
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace fibermon::train_eval
