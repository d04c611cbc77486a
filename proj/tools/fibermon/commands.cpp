// SPDX-License-Identifier: Apache-2.0
#include "commands.hpp"

#include "run_config.hpp"

#include "fibermon/error.hpp"
#include "fibermon/hash.hpp"
#include "fibermon/models/model_io.hpp"
#include "fibermon/otdr/dataset_io.hpp"
#include "fibermon/train_eval/evaluation.hpp"
#include "fibermon/train_eval/report.hpp"
#include "fibermon/train_eval/training.hpp"

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <istream>
#include <optional>
#include <ostream>

namespace fibermon::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;
using otdr::Split;

namespace {

RunConfig load_config(const Options& o) {
  return o.config ? load_run_config(*o.config) : RunConfig{};
}

void ensure_parent(const fs::path& path) {
  const fs::path parent = path.parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec) throw IoError("cannot create directory " + parent.string() + ": " + ec.message());
}

ojson paths_json(const std::vector<std::pair<PathKey, fs::path>>& paths) {
  ojson j = ojson::object();
  for (const auto& [k, p] : paths) j[std::string(path_key_name(k))] = p.string();
  return j;
}

/// The effective configuration of a run, written next to its outputs.
void write_resolved_config(const fs::path& path, std::string_view command, std::uint64_t seed, const ojson& sections,
                           const std::vector<std::pair<PathKey, fs::path>>& paths) {
  ojson j = ojson::object();
  j["command"] = std::string(command);
  j["seed"] = seed;
  for (auto it = sections.begin(); it != sections.end(); ++it) j[it.key()] = it.value();
  j["paths"] = paths_json(paths);
  ensure_parent(path);
  train_eval::write_text_file(path, j.dump(2) + "\n");
}

struct LoadedDataset {
  otdr::Dataset data;
  std::vector<std::size_t> lines;
  fs::path path;

  std::string where(std::size_t i) const { return path.string() + ":" + std::to_string(lines[i]); }
};

LoadedDataset load_dataset(const RunConfig& rc, const Options& o) {
  LoadedDataset d;
  d.path = require_path(rc, PathKey::dataset, o.data, "--data");
  d.data = otdr::read_dataset_jsonl(d.path, &d.lines);
  return d;
}

train_eval::TrainConfig resolved_train_config(const RunConfig& rc, const Options& o) {
  train_eval::TrainConfig c = rc.train;
  if (o.seed) {
    c.seed = *o.seed;
  } else if (rc.seed) {
    c.seed = *rc.seed;
  }
  c.validate();
  return c;
}

train_eval::EpochCallback progress(const Options& o, std::ostream& err) {
  if (o.quiet) return {};
  return [&err](std::size_t epoch, const train_eval::TrainHistory& h) {
    err << "epoch " << epoch << " train_loss " << train_eval::format_double(h.train_loss.back());
    if (!h.val_loss.empty()) err << " val_loss " << train_eval::format_double(h.val_loss.back());
    err << '\n';
  };
}

Record training_record(const fs::path& model, std::string_view kind, const train_eval::TrainHistory& h) {
  Record r{{"model", model.string()},
           {"kind", std::string(kind)},
           {"epochs_run", h.train_loss.size()},
           {"best_epoch", h.best_epoch},
           {"stopped_early", h.stopped_early}};
  r.emplace_back("final_train_loss", h.train_loss.empty() ? ojson(nullptr) : ojson(h.train_loss.back()));
  r.emplace_back("best_val_loss", h.val_loss.empty() || h.best_epoch == 0 ? ojson(nullptr)
                                                                          : ojson(h.val_loss[h.best_epoch - 1]));
  return r;
}

// --out or FIBERMON_OUT, else the first of `keys` set in the config.
std::optional<fs::path> output_path(const RunConfig& rc, const Options& o, std::initializer_list<PathKey> keys) {
  if (auto p = resolve_path(RunConfig{}, PathKey::out, o.out)) return p;
  for (PathKey k : keys) {
    if (auto it = rc.paths.find(k); it != rc.paths.end()) return it->second;
  }
  return std::nullopt;
}

fs::path require_output(const RunConfig& rc, const Options& o, std::initializer_list<PathKey> keys) {
  if (auto p = output_path(rc, o, keys)) return *p;
  std::string names;
  for (PathKey k : keys) names += ", paths." + std::string(path_key_name(k));
  throw ConfigError("missing --out (or FIBERMON_OUT" + names + " in the config)");
}

std::vector<otdr::SequenceSample> faulty(const std::vector<otdr::SequenceSample>& samples) {
  std::vector<otdr::SequenceSample> out;
  for (const auto& s : samples) {
    if (s.is_fault()) out.push_back(s);
  }
  return out;
}

std::vector<bool> fault_flags(std::span<const otdr::SequenceSample> samples) {
  std::vector<bool> f;
  f.reserve(samples.size());
  for (const auto& s : samples) f.push_back(s.is_fault());
  return f;
}

}  // namespace

void cmd_generate(const Options& o, Streams io) {
  const RunConfig rc = load_config(o);
  const Format format = format_from_string(o.format);
  const otdr::GeneratorConfig gc = rc.generator.value_or(otdr::GeneratorConfig::diagnosis_defaults());
  gc.validate();
  const std::uint64_t seed = o.seed.value_or(rc.seed.value_or(0));
  const fs::path out = require_output(rc, o, {PathKey::dataset});

  const otdr::Dataset ds = otdr::generate_dataset(gc, seed);
  ensure_parent(out);
  otdr::write_dataset_jsonl(ds, out);
  const fs::path manifest = otdr::manifest_path_for(out);
  train_eval::write_text_file(manifest, otdr::manifest_json(ds));
  write_resolved_config(sibling_path(out, ".config.json"), "generate", seed,
                        ojson{{"generator", ojson::parse(otdr::to_json(gc))}}, {{PathKey::out, out}});

  write_records(io.out, format,
                {{{"dataset", out.string()},
                  {"manifest", manifest.string()},
                  {"mode", std::string(otdr::to_string(ds.mode))},
                  {"seed", seed},
                  {"config_hash", ds.config_hash},
                  {"total", ds.size()},
                  {"train", ds.split_count(Split::train)},
                  {"val", ds.split_count(Split::val)},
                  {"test", ds.split_count(Split::test)}}});
}

void cmd_train_ae(const Options& o, Streams io) {
  const RunConfig rc = load_config(o);
  const Format format = format_from_string(o.format);
  const train_eval::TrainConfig cfg = resolved_train_config(rc, o);
  const fs::path out = require_output(rc, o, {PathKey::ae_model, PathKey::model});
  const LoadedDataset d = load_dataset(rc, o);

  std::size_t train_count = 0;
  for (std::size_t i = 0; i < d.data.size(); ++i) {
    if (d.data.splits[i] != Split::train) continue;
    ++train_count;
    if (d.data.samples[i].is_fault()) {
      throw ContractError(d.where(i) + ": train split holds a " + std::string(otdr::to_string(d.data.samples[i].label)) +
                          " sample; autoencoder training accepts normal samples only");
    }
  }
  if (train_count == 0) throw ContractError(d.path.string() + ": dataset has no train split");

  train_eval::AeTrainResult r = train_eval::train_ae(d.data, cfg, progress(o, io.err));
  r.model.meta.config_hash = hex64(fnv1a64(train_eval::to_json(cfg)));
  ensure_parent(out);
  models::save_model(r.model, out);
  train_eval::write_text_file(sibling_path(out, ".loss.csv"), train_eval::loss_history_csv(r.history));
  write_resolved_config(sibling_path(out, ".config.json"), "train-ae", cfg.seed,
                        ojson{{"train", ojson::parse(train_eval::to_json(cfg))}},
                        {{PathKey::dataset, d.path}, {PathKey::out, out}});
  write_records(io.out, format, {training_record(out, "autoencoder", r.history)});
}

void cmd_train_diag(const Options& o, Streams io) {
  const RunConfig rc = load_config(o);
  const Format format = format_from_string(o.format);
  const train_eval::TrainConfig cfg = resolved_train_config(rc, o);
  const fs::path out = require_output(rc, o, {PathKey::diag_model, PathKey::model});
  const LoadedDataset d = load_dataset(rc, o);

  for (std::size_t i = 0; i < d.data.size(); ++i) {
    if (!d.data.samples[i].is_fault()) {
      throw ContractError(d.where(i) + ": normal sample; diagnosis training accepts faulty samples only");
    }
  }
  if (d.data.split_count(Split::train) == 0) throw ContractError(d.path.string() + ": dataset has no train split");

  train_eval::DiagTrainResult r = train_eval::train_diag(d.data, cfg, progress(o, io.err));
  r.model.meta.config_hash = hex64(fnv1a64(train_eval::to_json(cfg)));
  ensure_parent(out);
  models::save_model(r.model, out);
  train_eval::write_text_file(sibling_path(out, ".loss.csv"), train_eval::loss_history_csv(r.history));
  write_resolved_config(sibling_path(out, ".config.json"), "train-diag", cfg.seed,
                        ojson{{"train", ojson::parse(train_eval::to_json(cfg))}},
                        {{PathKey::dataset, d.path}, {PathKey::out, out}});
  write_records(io.out, format, {training_record(out, "diagnosis", r.history)});
}

void cmd_calibrate(const Options& o, Streams io) {
  const RunConfig rc = load_config(o);
  const Format format = format_from_string(o.format);
  auto model_arg = resolve_path(rc, PathKey::model, o.model);
  if (!model_arg) model_arg = resolve_path(rc, PathKey::ae_model, std::nullopt);
  if (!model_arg) throw ConfigError("missing --model (or FIBERMON_MODEL, or paths.model or paths.ae_model in the config)");
  const fs::path model_path = *model_arg;
  const fs::path out = output_path(rc, o, {}).value_or(model_path);
  models::AeModel model = models::load_ae_model(model_path);
  const LoadedDataset d = load_dataset(rc, o);
  const auto val = d.data.subset(Split::val);
  if (val.empty()) throw ContractError(d.path.string() + ": dataset has no val split");

  const train_eval::ThresholdSweep sweep = train_eval::calibrate(model, val);
  ensure_parent(out);
  models::save_model(model, out);
  const fs::path curve = sibling_path(out, ".threshold_curve.csv");
  train_eval::write_text_file(curve, train_eval::threshold_curve_csv(sweep));
  write_resolved_config(sibling_path(out, ".calibrate.json"), "calibrate", model.meta.seed, ojson::object(),
                        {{PathKey::model, model_path}, {PathKey::dataset, d.path}, {PathKey::out, out}});

  const auto& best = sweep.curve[sweep.best_index];
  write_records(io.out, format,
                {{{"model", out.string()},
                  {"theta", sweep.theta},
                  {"precision", best.metrics.precision},
                  {"recall", best.metrics.recall},
                  {"f1", best.metrics.f1},
                  {"curve", curve.string()}}});
}

void cmd_eval(const Options& o, Streams io) {
  const RunConfig rc = load_config(o);
  const Format format = format_from_string(o.format);
  const auto ae_path = resolve_path(rc, PathKey::ae_model, o.ae_model);
  const auto diag_path = resolve_path(rc, PathKey::diag_model, o.diag_model);
  if (!ae_path && !diag_path) throw ConfigError("eval needs --ae-model, --diag-model or both");
  const fs::path out = require_path(rc, PathKey::out, o.out, "--out");
  const LoadedDataset d = load_dataset(rc, o);
  const auto test = d.data.subset(Split::test);
  if (test.empty()) throw ContractError(d.path.string() + ": dataset has no test split");

  train_eval::EvalReport report;
  std::vector<std::pair<PathKey, fs::path>> paths{{PathKey::dataset, d.path}};
  std::uint64_t seed = 0;
  if (ae_path) {
    const models::AeModel ae = models::load_ae_model(*ae_path);
    seed = ae.meta.seed;
    paths.emplace_back(PathKey::ae_model, *ae_path);
    const auto val = d.data.subset(Split::val);
    const std::vector<bool> flags = fault_flags(val);
    const bool both = std::find(flags.begin(), flags.end(), true) != flags.end() &&
                      std::find(flags.begin(), flags.end(), false) != flags.end();
    if (both) report.sweep = train_eval::sweep_threshold(models::anomaly_scores(ae, val), flags);
    report.detection = train_eval::evaluate_detection(ae, test);
  }
  if (diag_path) {
    const models::DiagModel diag = models::load_diag_model(*diag_path);
    if (!ae_path) seed = diag.meta.seed;
    paths.emplace_back(PathKey::diag_model, *diag_path);
    const auto faults = faulty(test);
    if (faults.empty()) throw ContractError(d.path.string() + ": test split holds no faulty samples");
    report.diagnosis = train_eval::evaluate_diag(diag, faults);
  }
  paths.emplace_back(PathKey::out, out);
  train_eval::emit_report(report, out);
  write_resolved_config(out / "config.json", "eval", seed, ojson::object(), paths);

  switch (format) {
    case Format::text: io.out << train_eval::summary_text(report); break;
    case Format::json_lines: io.out << train_eval::summary_json(report) << '\n'; break;
    case Format::csv: {
      Record r{{"report", out.string()}};
      if (report.detection) {
        r.emplace_back("theta", report.detection->theta);
        r.emplace_back("precision", report.detection->metrics.precision);
        r.emplace_back("recall", report.detection->metrics.recall);
        r.emplace_back("f1", report.detection->metrics.f1);
        r.emplace_back("auc", report.detection->roc.auc);
      }
      if (report.diagnosis) {
        r.emplace_back("accuracy", report.diagnosis->accuracy);
        r.emplace_back("rmse_index", report.diagnosis->rmse_index);
        r.emplace_back("rmse_m", report.diagnosis->rmse_m);
      }
      write_records(io.out, format, {r});
      break;
    }
  }
}

void cmd_detect(const Options& o, Streams io) {
  const RunConfig rc = load_config(o);
  const Format format = format_from_string(o.format);
  const fs::path ae_path = require_path(rc, PathKey::ae_model, o.ae_model, "--ae-model");
  const models::AeModel ae = models::load_ae_model(ae_path);
  if (!ae.meta.theta) throw ContractError(ae_path.string() + ": autoencoder has no detection threshold; calibrate first");
  const double theta = *ae.meta.theta;
  std::optional<models::DiagModel> diag;
  if (auto p = resolve_path(rc, PathKey::diag_model, o.diag_model)) diag = models::load_diag_model(*p);

  // Parse the whole input before printing anything.
  const auto input = resolve_path(rc, PathKey::dataset, o.data);
  const bool from_stdin = !input || input->string() == "-";
  std::ifstream file;
  if (!from_stdin) {
    file.open(*input, std::ios::binary);
    if (!file) throw IoError("cannot open " + input->string());
  }
  std::istream& in = from_stdin ? io.in : file;
  const std::string name = from_stdin ? "<stdin>" : input->string();
  std::vector<otdr::SequenceSample> samples;
  std::vector<std::size_t> lines;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (line.empty()) continue;
    try {
      samples.push_back(otdr::parse_json_line(line).sample);
    } catch (const FormatError& e) {
      throw FormatError(name + ":" + std::to_string(line_no) + ": " + e.what());
    }
    lines.push_back(line_no);
  }

  std::vector<Record> records;
  records.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double score = models::anomaly_score(ae, samples[i]);
    const bool anomalous = models::detect_score(score, theta) == models::Verdict::anomalous;
    Record r{{"line", lines[i]},
             {"score", score},
             {"theta", theta},
             {"verdict", anomalous ? "anomalous" : "normal"}};
    if (anomalous && diag) {
      const models::Diagnosis dg = models::diagnose(*diag, samples[i]);
      r.emplace_back("class", std::string(otdr::to_string(dg.label)));
      r.emplace_back("position_index", dg.position_index);
      r.emplace_back("position_m", static_cast<double>(dg.position_index) * otdr::kMetersPerSample);
      r.emplace_back("confidence", dg.class_probs[otdr::fault_class_index(dg.label)]);
    } else {
      for (const char* k : {"class", "position_index", "position_m", "confidence"}) r.emplace_back(k, nullptr);
    }
    records.push_back(std::move(r));
  }
  write_records(io.out, format, records);
}

}  // namespace fibermon::cli
