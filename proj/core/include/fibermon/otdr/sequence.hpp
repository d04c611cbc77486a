// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "fibermon/nn/tensor.hpp"
#include "fibermon/otdr/fiber.hpp"
#include "fibermon/otdr/trace.hpp"

#include <optional>
#include <span>
#include <vector>

namespace fibermon::otdr {

/// One normalized 30-point window, the unit both models consume.
struct SequenceSample {
  nn::Tensor points = nn::Tensor({kSequenceLength});  // in [0, 1]
  double snr_db = 0.0;
  Label label = Label::normal;
  /// Index of the fault inside the window; present iff label != normal.
  std::optional<std::size_t> position_index;

  bool is_fault() const { return label != Label::normal; }
  /// Throws ContractError when an invariant does not hold.
  void validate() const;

  bool operator==(const SequenceSample&) const = default;
};

/// Min-max normalization to [0, 1]; a constant window maps to all zeros.
std::vector<double> min_max_normalize(std::span<const double> values);

/// Cuts a trace into windows of 30 samples starting every `stride` samples
/// (non-overlapping by default), normalizes each window and labels it from the
/// first fault event inside it. The trace SNR is copied to every window.
/// Tails shorter than a window are dropped.
std::vector<SequenceSample> segment_and_normalize(const OtdrTrace& trace, std::size_t stride = kSequenceLength);

/// Estimated SNR of a window: 10*log10(range / sigma) with sigma the standard
/// deviation of the residual after removing a least-squares line, clamped to
/// [0, 40] dB. `noise_sigma` overrides the residual estimate.
double compute_snr(std::span<const double> points, std::optional<double> noise_sigma = std::nullopt);

}  // namespace fibermon::otdr
