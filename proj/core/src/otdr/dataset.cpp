// SPDX-License-Identifier: Apache-2.0
#include "fibermon/otdr/dataset.hpp"

#include "fibermon/error.hpp"
#include "fibermon/hash.hpp"
#include "fibermon/nn/rng.hpp"
#include "fibermon/otdr/trace.hpp"
#include "util/json_util.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace fibermon::otdr {

using util::json;

std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

Split split_from_string(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "val") return Split::val;
  if (name == "test") return Split::test;
  throw FormatError("unknown split '" + std::string(name) + "'");
}

std::string_view to_string(DatasetMode m) { return m == DatasetMode::detection ? "detection" : "diagnosis"; }

DatasetMode dataset_mode_from_string(std::string_view name) {
  if (name == "detection") return DatasetMode::detection;
  if (name == "diagnosis") return DatasetMode::diagnosis;
  throw ConfigError("unknown dataset mode '" + std::string(name) + "' (expected detection or diagnosis)");
}

GeneratorConfig GeneratorConfig::detection_defaults() {
  GeneratorConfig c;
  c.mode = DatasetMode::detection;
  c.normal_count = 1000;
  c.fault_count = 1000;
  c.splits = {0.7, 0.15, 0.15};
  return c;
}

GeneratorConfig GeneratorConfig::diagnosis_defaults() { return GeneratorConfig{}; }

namespace {

void check_range(const Range& r, const char* name, double lo = -1e300, double hi = 1e300) {
  if (!(r.min <= r.max) || r.min < lo || r.max > hi) {
    throw ConfigError(std::string(name) + ": invalid range [" + std::to_string(r.min) + ", " +
                      std::to_string(r.max) + "]");
  }
}

}  // namespace

void GeneratorConfig::validate() const {
  if (total() == 0) throw ConfigError("dataset config requests zero sequences");
  if (fault_classes.empty()) throw ConfigError("fault_classes must not be empty");
  std::set<Label> seen;
  for (Label l : fault_classes) {
    if (l == Label::normal) throw ConfigError("fault_classes must not contain 'normal'");
    if (!seen.insert(l).second) throw ConfigError("fault_classes contains duplicates");
  }
  if (mode == DatasetMode::detection) {
    if (normal_count == 0 || fault_count == 0) {
      throw ConfigError("detection datasets need both normal and faulty sequences");
    }
  } else {
    if (normal_count != 0) throw ConfigError("diagnosis datasets contain faulty sequences only (normal_count must be 0)");
    if (fault_count == 0) throw ConfigError("diagnosis datasets need fault_count > 0");
  }
  const double sum = splits.train + splits.val + splits.test;
  if (splits.train < 0 || splits.val < 0 || splits.test < 0 || std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("split fractions must be non-negative and sum to 1");
  }
  if (mode == DatasetMode::detection && splits.val + splits.test <= 0.0) {
    throw ConfigError("detection datasets need a non-empty val or test share for faults");
  }
  check_range(snr_db, "snr_db", 0.0, 40.0);
  if (position_min > position_max || position_max >= kSequenceLength) {
    throw ConfigError("fault positions must satisfy position_min <= position_max < 30");
  }
  const SimulationRanges& s = simulation;
  check_range(s.attenuation_db_per_km, "attenuation_db_per_km", 1e-9);
  check_range(s.launch_level_db, "launch_level_db");
  check_range(s.splice_loss_db, "splice_loss_db", 0.0);
  check_range(s.tap_loss_db, "tap_loss_db", 0.0);
  check_range(s.dirty_reflection_db, "dirty_reflection_db", 0.0);
  check_range(s.dirty_loss_db, "dirty_loss_db", 0.0);
  check_range(s.cut_reflection_db, "cut_reflection_db", 0.0);
  check_range(s.benign_reflection_db, "benign_reflection_db", 0.0);
  check_range(s.benign_loss_db, "benign_loss_db", 0.0);
  if (s.tap_ramp_min < 1 || s.tap_ramp_min > s.tap_ramp_max) throw ConfigError("tap ramp range invalid");
  if (s.cut_reflection_probability < 0 || s.cut_reflection_probability > 1 || s.benign_event_fraction < 0 ||
      s.benign_event_fraction > 1) {
    throw ConfigError("probabilities must lie in [0, 1]");
  }
  if (!(s.pulse_width_ns > 0 && s.sample_interval_ns > 0 && s.group_index > 0)) {
    throw ConfigError("pulse width, sample interval and group index must be positive");
  }
}

// ---------------------------------------------------------------------------
// JSON

namespace {

void read_range(util::StrictObject& o, const char* key, Range& r) {
  std::vector<double> v;
  o.optional(key, v);
  if (v.empty()) return;
  if (v.size() != 2) throw ConfigError(o.context() + "." + key + ": expected [min, max]");
  r = {v[0], v[1]};
}

json range_json(const Range& r) { return json::array({r.min, r.max}); }

}  // namespace

GeneratorConfig generator_config_from_json(std::string_view text) {
  const json j = util::parse_json(text, "dataset config");
  util::StrictObject o(j, "dataset");
  std::string mode = "diagnosis";
  o.optional("mode", mode);
  GeneratorConfig c = dataset_mode_from_string(mode) == DatasetMode::detection ? GeneratorConfig::detection_defaults()
                                                                              : GeneratorConfig::diagnosis_defaults();
  o.optional("normal_count", c.normal_count);
  o.optional("fault_count", c.fault_count);
  std::vector<std::string> classes;
  o.optional("fault_classes", classes);
  if (!classes.empty()) {
    c.fault_classes.clear();
    for (const auto& name : classes) {
      try {
        c.fault_classes.push_back(label_from_string(name));
      } catch (const FormatError& e) {
        throw ConfigError(std::string("dataset.fault_classes: ") + e.what());
      }
    }
  }
  read_range(o, "snr_db", c.snr_db);
  if (const json* sj = o.child("splits")) {
    util::StrictObject so(*sj, "dataset.splits");
    so.optional("train", c.splits.train);
    so.optional("val", c.splits.val);
    so.optional("test", c.splits.test);
    so.finish();
  }
  o.optional("position_min", c.position_min);
  o.optional("position_max", c.position_max);
  if (const json* sim = o.child("simulation")) {
    util::StrictObject so(*sim, "dataset.simulation");
    SimulationRanges& s = c.simulation;
    read_range(so, "attenuation_db_per_km", s.attenuation_db_per_km);
    read_range(so, "launch_level_db", s.launch_level_db);
    read_range(so, "splice_loss_db", s.splice_loss_db);
    read_range(so, "tap_loss_db", s.tap_loss_db);
    so.optional("tap_ramp_min", s.tap_ramp_min);
    so.optional("tap_ramp_max", s.tap_ramp_max);
    read_range(so, "dirty_reflection_db", s.dirty_reflection_db);
    read_range(so, "dirty_loss_db", s.dirty_loss_db);
    read_range(so, "cut_reflection_db", s.cut_reflection_db);
    so.optional("cut_reflection_probability", s.cut_reflection_probability);
    so.optional("benign_event_fraction", s.benign_event_fraction);
    read_range(so, "benign_reflection_db", s.benign_reflection_db);
    read_range(so, "benign_loss_db", s.benign_loss_db);
    so.optional("pulse_width_ns", s.pulse_width_ns);
    so.optional("sample_interval_ns", s.sample_interval_ns);
    so.optional("group_index", s.group_index);
    so.finish();
  }
  o.finish();
  c.validate();
  return c;
}

std::string to_json(const GeneratorConfig& c) {
  json classes = json::array();
  for (Label l : c.fault_classes) classes.push_back(std::string(to_string(l)));
  const SimulationRanges& s = c.simulation;
  json j = {
      {"mode", std::string(to_string(c.mode))},
      {"normal_count", c.normal_count},
      {"fault_count", c.fault_count},
      {"fault_classes", classes},
      {"snr_db", range_json(c.snr_db)},
      {"splits", {{"train", c.splits.train}, {"val", c.splits.val}, {"test", c.splits.test}}},
      {"position_min", c.position_min},
      {"position_max", c.position_max},
      {"simulation",
       {{"attenuation_db_per_km", range_json(s.attenuation_db_per_km)},
        {"launch_level_db", range_json(s.launch_level_db)},
        {"splice_loss_db", range_json(s.splice_loss_db)},
        {"tap_loss_db", range_json(s.tap_loss_db)},
        {"tap_ramp_min", s.tap_ramp_min},
        {"tap_ramp_max", s.tap_ramp_max},
        {"dirty_reflection_db", range_json(s.dirty_reflection_db)},
        {"dirty_loss_db", range_json(s.dirty_loss_db)},
        {"cut_reflection_db", range_json(s.cut_reflection_db)},
        {"cut_reflection_probability", s.cut_reflection_probability},
        {"benign_event_fraction", s.benign_event_fraction},
        {"benign_reflection_db", range_json(s.benign_reflection_db)},
        {"benign_loss_db", range_json(s.benign_loss_db)},
        {"pulse_width_ns", s.pulse_width_ns},
        {"sample_interval_ns", s.sample_interval_ns},
        {"group_index", s.group_index}}},
  };
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Dataset

std::vector<SequenceSample> Dataset::subset(Split s) const {
  std::vector<SequenceSample> out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (splits[i] == s) out.push_back(samples[i]);
  }
  return out;
}

std::map<Label, std::size_t> Dataset::class_counts() const {
  std::map<Label, std::size_t> m;
  for (const auto& s : samples) ++m[s.label];
  return m;
}

std::map<Label, std::size_t> Dataset::class_counts(Split split) const {
  std::map<Label, std::size_t> m;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (splits[i] == split) ++m[samples[i].label];
  }
  return m;
}

std::size_t Dataset::split_count(Split s) const {
  return static_cast<std::size_t>(std::count(splits.begin(), splits.end(), s));
}

std::vector<EventSpec> sample_events(const SimulationRanges& r, Label label, std::size_t position, nn::Rng& rng) {
  const double mps = meters_per_sample(r.sample_interval_ns, r.group_index);
  EventSpec e;
  e.position_m = static_cast<double>(position) * mps;
  switch (label) {
    case Label::normal: {
      if (rng.uniform() >= r.benign_event_fraction) return {};
      e.kind = rng.uniform() < 0.5 ? EventKind::connector_reflective : EventKind::reflector;
      e.reflectance_db = rng.uniform(r.benign_reflection_db.min, r.benign_reflection_db.max);
      e.loss_db = rng.uniform(r.benign_loss_db.min, r.benign_loss_db.max);
      break;
    }
    case Label::bad_splice:
      e.kind = EventKind::splice_loss;
      e.loss_db = rng.uniform(r.splice_loss_db.min, r.splice_loss_db.max);
      break;
    case Label::fiber_tapping:
      e.kind = EventKind::bend_tap;
      e.loss_db = rng.uniform(r.tap_loss_db.min, r.tap_loss_db.max);
      e.ramp_samples = static_cast<std::size_t>(
          rng.uniform_int(static_cast<std::int64_t>(r.tap_ramp_min), static_cast<std::int64_t>(r.tap_ramp_max)));
      break;
    case Label::dirty_connector:
      e.kind = EventKind::dirty_connector;
      e.reflectance_db = rng.uniform(r.dirty_reflection_db.min, r.dirty_reflection_db.max);
      e.loss_db = rng.uniform(r.dirty_loss_db.min, r.dirty_loss_db.max);
      break;
    case Label::fiber_cut: {
      e.kind = EventKind::fiber_cut;
      const double height = rng.uniform(r.cut_reflection_db.min, r.cut_reflection_db.max);
      e.reflectance_db = rng.uniform() < r.cut_reflection_probability ? height : 0.0;
      break;
    }
  }
  return {e};
}

Label item_label(const GeneratorConfig& config, std::size_t item) {
  if (item < config.normal_count) return Label::normal;
  return config.fault_classes[(item - config.normal_count) % config.fault_classes.size()];
}

SequenceSample generate_sample(const GeneratorConfig& config, std::uint64_t seed, std::size_t item, Label label) {
  nn::Rng rng(nn::derive_seed(seed, "dataset", item));
  const SimulationRanges& r = config.simulation;
  const double snr = rng.uniform(config.snr_db.min, config.snr_db.max);

  FiberSpec fiber;
  fiber.sample_interval_ns = r.sample_interval_ns;
  fiber.group_index = r.group_index;
  fiber.pulse_width_ns = r.pulse_width_ns;
  fiber.attenuation_db_per_km = rng.uniform(r.attenuation_db_per_km.min, r.attenuation_db_per_km.max);
  fiber.launch_level_db = rng.uniform(r.launch_level_db.min, r.launch_level_db.max);
  // One window-sized section of fiber; the half sample keeps floor() at 30.
  fiber.length_km = (static_cast<double>(kSequenceLength) + 0.5) * fiber.meters_per_sample() / 1000.0;

  const auto position = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(config.position_min),
                                                                  static_cast<std::int64_t>(config.position_max)));
  const OtdrTrace clean = synthesize_trace(fiber, sample_events(r, label, position, rng));
  const OtdrTrace noisy = add_noise_for_snr(clean, snr, nn::derive_seed(seed, "noise", item));
  std::vector<SequenceSample> windows = segment_and_normalize(noisy);
  if (windows.size() != 1) throw ContractError("generated section did not yield exactly one window");
  if (windows.front().label != label) throw ContractError("generated window label disagrees with its event");
  return std::move(windows.front());
}

Dataset generate_dataset(const GeneratorConfig& config, std::uint64_t seed) {
  config.validate();
  Dataset ds;
  ds.mode = config.mode;
  ds.generator_seed = seed;
  ds.config_hash = hex64(fnv1a64(to_json(config)));
  const std::size_t n = config.total();
  ds.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ds.samples.push_back(generate_sample(config, seed, i, item_label(config, i)));

  // Stratified split: shuffle each label's items, then cut by the fractions.
  ds.splits.assign(n, Split::train);
  nn::Rng split_rng(nn::derive_seed(seed, "split"));
  std::map<Label, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < n; ++i) by_label[ds.samples[i].label].push_back(i);
  for (auto& [label, items] : by_label) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(split_rng.uniform_int(0, static_cast<std::int64_t>(i - 1)));
      std::swap(items[i - 1], items[j]);
    }
    SplitFractions f = config.splits;
    if (config.mode == DatasetMode::detection && label != Label::normal) {
      const double held_out = f.val + f.test;
      f = {0.0, f.val / held_out, f.test / held_out};
    }
    const auto count = static_cast<double>(items.size());
    const auto n_train = static_cast<std::size_t>(std::llround(count * f.train));
    const auto n_val = std::min(items.size() - n_train, static_cast<std::size_t>(std::llround(count * f.val)));
    for (std::size_t k = 0; k < items.size(); ++k) {
      ds.splits[items[k]] = k < n_train ? Split::train : (k < n_train + n_val ? Split::val : Split::test);
    }
  }
  return ds;
}

}  // namespace fibermon::otdr
