// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "fibermon/otdr/dataset.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fibermon::otdr {

/// One JSON-lines record:
///   {"points":[30 numbers],"snr_db":x,"label":"...","position_index":k|null,"split":"..."}
std::string to_json_line(const SequenceSample& s, Split split);

struct ParsedLine {
  SequenceSample sample;
  std::optional<Split> split;
};
/// Throws FormatError for malformed records (missing fields, wrong sizes,
/// points outside [0, 1], position/label mismatch).
ParsedLine parse_json_line(std::string_view line);

void write_dataset_jsonl(const Dataset& ds, const std::filesystem::path& path);
/// Reads a JSON-lines dataset. Errors name the 1-based line number. The mode
/// is detection when any record is labeled normal. `line_numbers`, when
/// given, receives the 1-based line of every sample.
Dataset read_dataset_jsonl(const std::filesystem::path& path, std::vector<std::size_t>* line_numbers = nullptr);

/// Counts per split and label, seed and config hash.
std::string manifest_json(const Dataset& ds);
/// `<stem>.manifest.json` next to a dataset file.
std::filesystem::path manifest_path_for(const std::filesystem::path& dataset_path);

}  // namespace fibermon::otdr
