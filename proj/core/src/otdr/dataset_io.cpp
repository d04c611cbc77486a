// SPDX-License-Identifier: Apache-2.0
#include "fibermon/otdr/dataset_io.hpp"

#include "fibermon/error.hpp"
#include "util/json_util.hpp"

#include <fstream>

namespace fibermon::otdr {

using util::json;

std::string to_json_line(const SequenceSample& s, Split split) {
  json j;
  j["points"] = std::vector<double>(s.points.storage().begin(), s.points.storage().end());
  j["snr_db"] = s.snr_db;
  j["label"] = std::string(to_string(s.label));
  j["position_index"] = s.position_index ? json(*s.position_index) : json(nullptr);
  j["split"] = std::string(to_string(split));
  return j.dump();
}

ParsedLine parse_json_line(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("record is not a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    if (k != "points" && k != "snr_db" && k != "label" && k != "position_index" && k != "split") {
      throw FormatError("unknown field '" + k + "'");
    }
  }
  ParsedLine out;
  try {
    const auto points = j.at("points").get<std::vector<double>>();
    if (points.size() != kSequenceLength) {
      throw FormatError("points must hold " + std::to_string(kSequenceLength) + " values, got " +
                        std::to_string(points.size()));
    }
    out.sample.points = nn::Tensor({kSequenceLength}, points);
    out.sample.snr_db = j.at("snr_db").get<double>();
    out.sample.label = label_from_string(j.at("label").get<std::string>());
    const json& pos = j.at("position_index");
    if (!pos.is_null()) out.sample.position_index = pos.get<std::size_t>();
    if (auto it = j.find("split"); it != j.end() && !it->is_null()) {
      out.split = split_from_string(it->get<std::string>());
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad field: ") + e.what());
  }
  try {
    out.sample.validate();
  } catch (const ContractError& e) {
    throw FormatError(e.what());
  }
  return out;
}

void write_dataset_jsonl(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  for (std::size_t i = 0; i < ds.samples.size(); ++i) f << to_json_line(ds.samples[i], ds.splits[i]) << '\n';
  if (!f) throw IoError("failed writing " + path.string());
}

Dataset read_dataset_jsonl(const std::filesystem::path& path, std::vector<std::size_t>* line_numbers) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  Dataset ds;
  if (line_numbers != nullptr) line_numbers->clear();
  std::string line;
  std::size_t line_no = 0;
  bool any_normal = false;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    ParsedLine p;
    try {
      p = parse_json_line(line);
    } catch (const FormatError& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!p.split) throw FormatError(path.string() + ":" + std::to_string(line_no) + ": missing split");
    any_normal = any_normal || !p.sample.is_fault();
    ds.samples.push_back(std::move(p.sample));
    ds.splits.push_back(*p.split);
    if (line_numbers != nullptr) line_numbers->push_back(line_no);
  }
  ds.mode = any_normal ? DatasetMode::detection : DatasetMode::diagnosis;
  return ds;
}

std::string manifest_json(const Dataset& ds) {
  json counts = json::object();
  for (Split s : {Split::train, Split::val, Split::test}) {
    json per_label = json::object();
    for (const auto& [label, n] : ds.class_counts(s)) per_label[std::string(to_string(label))] = n;
    counts[std::string(to_string(s))] = per_label;
  }
  json totals = json::object();
  for (const auto& [label, n] : ds.class_counts()) totals[std::string(to_string(label))] = n;
  const json j = {{"mode", std::string(to_string(ds.mode))},
                  {"seed", ds.generator_seed},
                  {"config_hash", ds.config_hash},
                  {"total", ds.size()},
                  {"class_counts", totals},
                  {"split_counts", counts}};
  return j.dump(2) + "\n";
}

std::filesystem::path manifest_path_for(const std::filesystem::path& dataset_path) {
  std::filesystem::path p = dataset_path;
  p.replace_extension(".manifest.json");
  return p;
}

}  // namespace fibermon::otdr
