// SPDX-License-Identifier: Apache-2.0
#include "fibermon/otdr/sequence.hpp"

#include "fibermon/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fibermon::otdr {

void SequenceSample::validate() const {
  if (points.shape() != nn::Shape{kSequenceLength}) {
    throw ContractError("sequence must hold " + std::to_string(kSequenceLength) + " points");
  }
  for (double p : points.values()) {
    if (!(p >= 0.0 && p <= 1.0)) throw ContractError("sequence points must lie in [0, 1]");
  }
  if (!std::isfinite(snr_db)) throw ContractError("sequence SNR must be finite");
  if (is_fault() != position_index.has_value()) {
    throw ContractError("fault position must be present exactly when the label is a fault");
  }
  if (position_index && *position_index >= kSequenceLength) throw ContractError("fault position outside the window");
}

std::vector<double> min_max_normalize(std::span<const double> values) {
  std::vector<double> out(values.size(), 0.0);
  if (values.empty()) return out;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = std::clamp((values[i] - *lo) / range, 0.0, 1.0);
  return out;
}

std::vector<SequenceSample> segment_and_normalize(const OtdrTrace& trace, std::size_t stride) {
  if (stride == 0) throw ContractError("segment stride must be positive");
  std::vector<std::size_t> fault_idx;
  std::vector<Label> fault_lbl;
  for (const EventSpec& e : trace.events) {
    if (auto l = fault_label(e.kind)) {
      fault_idx.push_back(event_index(e, trace.meters_per_sample));
      fault_lbl.push_back(*l);
    }
  }

  std::vector<SequenceSample> out;
  const auto values = trace.samples_db.values();
  for (std::size_t start = 0; start + kSequenceLength <= values.size(); start += stride) {
    SequenceSample s;
    s.points = nn::Tensor({kSequenceLength}, min_max_normalize(values.subspan(start, kSequenceLength)));
    s.snr_db = trace.snr_db;
    for (std::size_t i = 0; i < fault_idx.size(); ++i) {
      if (fault_idx[i] >= start && fault_idx[i] < start + kSequenceLength) {
        s.label = fault_lbl[i];
        s.position_index = fault_idx[i] - start;
        break;
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

double compute_snr(std::span<const double> points, std::optional<double> noise_sigma) {
  constexpr double kMaxSnr = 40.0;
  if (points.size() < 2) return kMaxSnr;
  const auto [lo, hi] = std::minmax_element(points.begin(), points.end());
  const double range = *hi - *lo;

  double sigma = 0.0;
  if (noise_sigma) {
    sigma = *noise_sigma;
  } else {
    const auto n = static_cast<double>(points.size());
    const double x_mean = (n - 1.0) / 2.0;
    double y_mean = 0.0;
    for (double p : points) y_mean += p;
    y_mean /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double dx = static_cast<double>(i) - x_mean;
      sxy += dx * (points[i] - y_mean);
      sxx += dx * dx;
    }
    const double slope = sxy / sxx;
    double ss = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double r = points[i] - (y_mean + slope * (static_cast<double>(i) - x_mean));
      ss += r * r;
    }
    sigma = std::sqrt(ss / n);
  }
  // A residual this small relative to the range is rounding noise.
  if (!(sigma > range * 1e-12)) return kMaxSnr;
  return std::clamp(10.0 * std::log10(range / sigma), 0.0, kMaxSnr);
}

}  // namespace fibermon::otdr
