// SPDX-License-Identifier: Apache-2.0
#include "fibermon/otdr/fiber.hpp"

#include "fibermon/error.hpp"

#include <cmath>
#include <string>

namespace fibermon::otdr {

double FiberSpec::meters_per_sample() const { return otdr::meters_per_sample(sample_interval_ns, group_index); }

std::size_t FiberSpec::sample_count() const {
  return static_cast<std::size_t>(std::floor(length_km * 1000.0 / meters_per_sample()));
}

void FiberSpec::validate() const {
  if (!(length_km > 0.0)) throw ContractError("fiber length must be positive");
  if (!(attenuation_db_per_km > 0.0)) throw ContractError("fiber attenuation must be positive");
  if (!(sample_interval_ns > 0.0)) throw ContractError("sample interval must be positive");
  if (!(group_index > 0.0)) throw ContractError("group index must be positive");
  if (!(pulse_width_ns > 0.0)) throw ContractError("pulse width must be positive");
  if (!(noise_floor_offset_db > 0.0)) throw ContractError("noise floor offset must be positive");
  if (!std::isfinite(launch_level_db)) throw ContractError("launch level must be finite");
}

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::connector_reflective: return "connector_reflective";
    case EventKind::reflector: return "reflector";
    case EventKind::splice_loss: return "splice_loss";
    case EventKind::bend_tap: return "bend_tap";
    case EventKind::fiber_cut: return "fiber_cut";
    case EventKind::dirty_connector: return "dirty_connector";
  }
  return "?";
}

std::string_view to_string(Label l) {
  switch (l) {
    case Label::normal: return "normal";
    case Label::fiber_cut: return "fiber_cut";
    case Label::fiber_tapping: return "fiber_tapping";
    case Label::bad_splice: return "bad_splice";
    case Label::dirty_connector: return "dirty_connector";
  }
  return "?";
}

Label label_from_string(std::string_view name) {
  for (Label l : {Label::normal, Label::fiber_cut, Label::fiber_tapping, Label::bad_splice, Label::dirty_connector}) {
    if (to_string(l) == name) return l;
  }
  throw FormatError("unknown label '" + std::string(name) + "'");
}

std::size_t fault_class_index(Label l) {
  switch (l) {
    case Label::fiber_cut: return 0;
    case Label::fiber_tapping: return 1;
    case Label::bad_splice: return 2;
    case Label::dirty_connector: return 3;
    case Label::normal: break;
  }
  throw ContractError("normal sequences have no fault class");
}

Label fault_class_from_index(std::size_t index) {
  static constexpr Label kClasses[] = {Label::fiber_cut, Label::fiber_tapping, Label::bad_splice,
                                       Label::dirty_connector};
  if (index >= kFaultClassCount) throw ContractError("fault class index out of range");
  return kClasses[index];
}

std::optional<Label> fault_label(EventKind k) {
  switch (k) {
    case EventKind::splice_loss: return Label::bad_splice;
    case EventKind::bend_tap: return Label::fiber_tapping;
    case EventKind::fiber_cut: return Label::fiber_cut;
    case EventKind::dirty_connector: return Label::dirty_connector;
    case EventKind::connector_reflective:
    case EventKind::reflector: return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace fibermon::otdr
