// SPDX-License-Identifier: Apache-2.0
#include "fibermon/otdr/trace.hpp"

#include "fibermon/error.hpp"
#include "fibermon/nn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace fibermon::otdr {

namespace {

bool is_reflective(EventKind k) {
  return k == EventKind::connector_reflective || k == EventKind::reflector || k == EventKind::dirty_connector ||
         k == EventKind::fiber_cut;
}

double cumulative_loss(const EventSpec& e, std::size_t event_idx, std::size_t k) {
  if (k < event_idx) return 0.0;
  if (e.kind == EventKind::bend_tap && e.ramp_samples > 1) {
    const double frac = static_cast<double>(k - event_idx + 1) / static_cast<double>(e.ramp_samples);
    return e.loss_db * std::min(frac, 1.0);
  }
  return e.loss_db;
}

}  // namespace

std::size_t event_index(const EventSpec& e, double meters_per_sample) {
  return static_cast<std::size_t>(std::llround(e.position_m / meters_per_sample));
}

OtdrTrace synthesize_trace(const FiberSpec& fiber, std::vector<EventSpec> events) {
  fiber.validate();
  const double mps = fiber.meters_per_sample();
  const std::size_t n = fiber.sample_count();
  if (n == 0) throw ContractError("fiber shorter than one sample");
  std::stable_sort(events.begin(), events.end(),
                   [](const EventSpec& a, const EventSpec& b) { return a.position_m < b.position_m; });

  std::vector<std::size_t> index(events.size());
  std::optional<std::size_t> cut_index;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const EventSpec& e = events[i];
    if (!(e.position_m >= 0.0) || e.position_m > fiber.length_km * 1000.0) {
      throw ContractError("event at " + std::to_string(e.position_m) + " m lies outside the fiber");
    }
    if (e.loss_db < 0.0 || e.reflectance_db < 0.0) throw ContractError("event loss and reflectance must be >= 0");
    if (e.kind == EventKind::bend_tap && e.ramp_samples == 0) throw ContractError("bend_tap needs ramp_samples >= 1");
    index[i] = event_index(e, mps);
    if (index[i] >= n) throw ContractError("event beyond the last trace sample");
    if (cut_index) throw ContractError("events after a fiber cut");
    if (e.kind == EventKind::fiber_cut) cut_index = index[i];
  }

  const double spike_sigma =
      (fiber.pulse_width_ns / fiber.sample_interval_ns) / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
  const double floor = fiber.noise_floor_db();
  double cut_reflection = 0.0;
  for (const EventSpec& e : events) {
    if (e.kind == EventKind::fiber_cut) cut_reflection = e.reflectance_db;
  }

  nn::Tensor clean({n});
  for (std::size_t k = 0; k < n; ++k) {
    if (cut_index && k > *cut_index) {
      // The terminal reflection pulse falls back to the floor.
      const double offset = static_cast<double>(k - *cut_index) / spike_sigma;
      clean[k] = floor;
      if (cut_reflection > 0.0 && offset < 6.0) {
        clean[k] += (clean[*cut_index] - floor) * std::exp(-0.5 * offset * offset);
      }
      continue;
    }
    double level = fiber.launch_level_db - fiber.attenuation_db_per_km * (static_cast<double>(k) * mps / 1000.0);
    for (std::size_t i = 0; i < events.size(); ++i) {
      const EventSpec& e = events[i];
      if (e.kind != EventKind::fiber_cut) level -= cumulative_loss(e, index[i], k);
      if (is_reflective(e.kind) && e.reflectance_db > 0.0) {
        const double offset = (static_cast<double>(k) - static_cast<double>(index[i])) / spike_sigma;
        if (std::abs(offset) < 6.0) level += e.reflectance_db * std::exp(-0.5 * offset * offset);
      }
    }
    clean[k] = level;
  }

  OtdrTrace trace;
  trace.samples_db = clean;
  trace.noiseless_db = std::move(clean);
  trace.meters_per_sample = mps;
  trace.events = std::move(events);
  trace.snr_db = 40.0;
  return trace;
}

double noise_sigma_for_snr(const OtdrTrace& trace, double target_snr_db) {
  if (!(target_snr_db >= 0.0 && target_snr_db <= 40.0)) {
    throw ContractError("target SNR must lie in [0, 40] dB, got " + std::to_string(target_snr_db));
  }
  const auto v = trace.noiseless_db.values();
  if (v.empty()) throw ContractError("cannot add noise to an empty trace");
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double dynamic_range = *hi - *lo;
  if (!(dynamic_range > 0.0)) throw ContractError("cannot set SNR of a flat trace");
  return dynamic_range / std::pow(10.0, target_snr_db / 10.0);
}

OtdrTrace add_noise_for_snr(const OtdrTrace& trace, double target_snr_db, std::uint64_t seed) {
  const double sigma = noise_sigma_for_snr(trace, target_snr_db);
  nn::Rng rng(seed);
  OtdrTrace out = trace;
  for (std::size_t k = 0; k < out.size(); ++k) out.samples_db[k] = trace.noiseless_db[k] + sigma * rng.normal();
  out.snr_db = target_snr_db;
  return out;
}

}  // namespace fibermon::otdr
