// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace fibermon::cli {

enum class Format { text, csv, json_lines };

Format format_from_string(std::string_view name);

/// One output row: ordered (column, value) pairs.
using Record = std::vector<std::pair<std::string, nlohmann::ordered_json>>;

/// Writes records to `out`.
///   text:       key=value pairs separated by spaces, one record per line
///   csv:        header from the first record, then one row per record
///   json-lines: one JSON object per line
void write_records(std::ostream& out, Format format, const std::vector<Record>& records);

}  // namespace fibermon::cli
