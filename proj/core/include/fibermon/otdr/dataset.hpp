// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "fibermon/nn/rng.hpp"
#include "fibermon/otdr/fiber.hpp"
#include "fibermon/otdr/sequence.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace fibermon::otdr {

enum class Split { train, val, test };
std::string_view to_string(Split s);
Split split_from_string(std::string_view name);

/// detection: normal + faulty windows; normals fill train, faults only val
/// and test. diagnosis: faulty windows only, stratified train/val/test.
enum class DatasetMode { detection, diagnosis };
std::string_view to_string(DatasetMode m);
DatasetMode dataset_mode_from_string(std::string_view name);

struct Range {
  double min = 0.0;
  double max = 0.0;
  bool operator==(const Range&) const = default;
};

struct SplitFractions {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
  bool operator==(const SplitFractions&) const = default;
};

/// Parameter ranges for the synthetic fiber sections and their events.
struct SimulationRanges {
  Range attenuation_db_per_km{0.18, 0.35};
  Range launch_level_db{10.0, 30.0};
  Range splice_loss_db{0.3, 1.5};
  Range tap_loss_db{0.05, 1.0};
  std::size_t tap_ramp_min = 2;
  std::size_t tap_ramp_max = 4;
  Range dirty_reflection_db{1.0, 4.0};
  Range dirty_loss_db{0.5, 2.0};
  Range cut_reflection_db{20.0, 40.0};
  /// Chance that a cut carries a terminal reflection.
  double cut_reflection_probability = 1.0;
  /// Chance that a normal window contains a healthy connector or reflector.
  double benign_event_fraction = 0.0;
  Range benign_reflection_db{0.5, 3.0};
  Range benign_loss_db{0.0, 0.15};
  double pulse_width_ns = kDefaultPulseWidthNs;
  double sample_interval_ns = kDefaultSampleIntervalNs;
  double group_index = kDefaultGroupIndex;

  bool operator==(const SimulationRanges&) const = default;
};

struct GeneratorConfig {
  DatasetMode mode = DatasetMode::diagnosis;
  std::size_t normal_count = 0;
  /// Faulty windows, spread over fault_classes with counts balanced within 1.
  std::size_t fault_count = 1000;
  std::vector<Label> fault_classes{Label::fiber_cut, Label::fiber_tapping, Label::bad_splice,
                                   Label::dirty_connector};
  Range snr_db{0.0, 30.0};
  SplitFractions splits{};
  std::size_t position_min = 2;
  std::size_t position_max = 27;
  SimulationRanges simulation{};

  /// Defaults for detection datasets (70% of normals train, the rest and all
  /// faults shared between val and test).
  static GeneratorConfig detection_defaults();
  static GeneratorConfig diagnosis_defaults();

  /// Throws ConfigError for an infeasible configuration.
  void validate() const;
  std::size_t total() const { return normal_count + fault_count; }

  bool operator==(const GeneratorConfig&) const = default;
};

/// Parses a generator config; unknown keys are rejected. Missing keys take
/// the defaults of the mode named by "mode".
GeneratorConfig generator_config_from_json(std::string_view text);
std::string to_json(const GeneratorConfig& config);

struct Dataset {
  std::vector<SequenceSample> samples;
  std::vector<Split> splits;  // parallel to samples
  DatasetMode mode = DatasetMode::diagnosis;
  std::uint64_t generator_seed = 0;
  std::string config_hash;

  std::size_t size() const { return samples.size(); }
  std::vector<SequenceSample> subset(Split s) const;
  std::map<Label, std::size_t> class_counts() const;
  std::map<Label, std::size_t> class_counts(Split s) const;
  std::size_t split_count(Split s) const;
};

/// Builds one window directly from (config, seed, item index); this is the
/// per-item unit generate_dataset runs for every sample.
SequenceSample generate_sample(const GeneratorConfig& config, std::uint64_t seed, std::size_t item, Label label);

/// Label of item `item` in generation order: normals first, then faults
/// cycling through config.fault_classes.
Label item_label(const GeneratorConfig& config, std::size_t item);

/// Deterministic in (config, seed). Each item draws from its own sub-stream,
/// so the result does not depend on generation order.
Dataset generate_dataset(const GeneratorConfig& config, std::uint64_t seed);

/// Events for one synthetic window section with the fault at `position`.
std::vector<EventSpec> sample_events(const SimulationRanges& ranges, Label label, std::size_t position,
                                     nn::Rng& rng);

}  // namespace fibermon::otdr
