// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "fibermon/nn/tensor.hpp"
#include "fibermon/otdr/fiber.hpp"

#include <cstdint>
#include <vector>

namespace fibermon::otdr {

/// Backscatter power in dB on a uniform distance grid.
struct OtdrTrace {
  nn::Tensor samples_db;    // [N], noisy when noise has been added
  nn::Tensor noiseless_db;  // [N], ground truth
  double meters_per_sample = kMetersPerSample;
  std::vector<EventSpec> events;
  /// SNR the noise was generated for; +inf-free, 40 for an untouched trace.
  double snr_db = 40.0;

  std::size_t size() const { return samples_db.size(); }
};

/// Sample index of an event on the trace grid.
std::size_t event_index(const EventSpec& e, double meters_per_sample);

/// Builds the noiseless trace: linear attenuation from the launch level, loss
/// steps at each event (a ramp for bend_tap), Gaussian reflection peaks whose
/// full width at half maximum equals the pulse width, and the noise floor
/// past a fiber cut. A cut's terminal reflection peaks at the cut sample and
/// its falling half decays from there to the floor.
///
/// Throws ContractError for events beyond the fiber end or after a cut.
OtdrTrace synthesize_trace(const FiberSpec& fiber, std::vector<EventSpec> events);

/// Adds zero-mean Gaussian noise with sigma = DR / 10^(snr/10), where DR is
/// the span of the noiseless trace (its peak minus its lowest level).
/// `target_snr_db` must lie in [0, 40]; a flat trace is rejected.
OtdrTrace add_noise_for_snr(const OtdrTrace& trace, double target_snr_db, std::uint64_t seed);

/// Noise sigma that add_noise_for_snr uses for a trace.
double noise_sigma_for_snr(const OtdrTrace& trace, double target_snr_db);

}  // namespace fibermon::otdr
