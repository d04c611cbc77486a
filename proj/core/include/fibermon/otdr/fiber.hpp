// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

namespace fibermon::otdr {

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s
inline constexpr double kDefaultGroupIndex = 1.468;
inline constexpr double kDefaultSampleIntervalNs = 1.0;
inline constexpr double kDefaultPulseWidthNs = 10.0;
/// Samples per sequence fed to the models.
inline constexpr std::size_t kSequenceLength = 30;

/// Two-way distance covered by one sample: c * dt / (2 n).
constexpr double meters_per_sample(double sample_interval_ns = kDefaultSampleIntervalNs,
                                   double group_index = kDefaultGroupIndex) {
  return kSpeedOfLight * sample_interval_ns * 1e-9 / (2.0 * group_index);
}

/// Distance grid for the default 1 ns sampling at n = 1.468 (~0.1021 m).
inline constexpr double kMetersPerSample = meters_per_sample();

struct FiberSpec {
  double length_km = 1.0;
  double attenuation_db_per_km = 0.2;
  double launch_level_db = 0.0;
  double sample_interval_ns = kDefaultSampleIntervalNs;
  double group_index = kDefaultGroupIndex;
  double pulse_width_ns = kDefaultPulseWidthNs;
  /// The trace drops this far below the launch level past a fiber cut.
  double noise_floor_offset_db = 40.0;

  double meters_per_sample() const;
  double noise_floor_db() const { return launch_level_db - noise_floor_offset_db; }
  /// Number of samples on the distance grid: floor(length / meters_per_sample).
  std::size_t sample_count() const;
  /// Throws ContractError if any invariant is violated.
  void validate() const;
};

enum class EventKind { connector_reflective, reflector, splice_loss, bend_tap, fiber_cut, dirty_connector };

std::string_view to_string(EventKind k);

/// Ground-truth labels of a sequence. The four fault classes are also the
/// classifier's output space in the order given by fault_class_index().
enum class Label { normal, fiber_cut, fiber_tapping, bad_splice, dirty_connector };

inline constexpr std::size_t kFaultClassCount = 4;

std::string_view to_string(Label l);
Label label_from_string(std::string_view name);
/// fiber_cut=0, fiber_tapping=1, bad_splice=2, dirty_connector=3.
std::size_t fault_class_index(Label l);
Label fault_class_from_index(std::size_t index);

/// Fault label carried by an event kind; connectors and reflectors are normal
/// network components and carry none.
std::optional<Label> fault_label(EventKind k);

struct EventSpec {
  EventKind kind = EventKind::splice_loss;
  double position_m = 0.0;
  double loss_db = 0.0;
  /// Peak height of the reflection above the local backscatter level, dB.
  /// Used by connector_reflective, reflector, dirty_connector and fiber_cut.
  double reflectance_db = 0.0;
  /// bend_tap only: the loss builds up linearly over this many samples.
  std::size_t ramp_samples = 1;
};

}  // namespace fibermon::otdr
