// SPDX-License-Identifier: Apache-2.0
#include "output.hpp"

#include "fibermon/error.hpp"
#include "fibermon/train_eval/report.hpp"

namespace fibermon::cli {

namespace {

std::string plain(const nlohmann::ordered_json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return train_eval::format_double(v.get<double>());
  return v.dump();
}

std::string csv_cell(const nlohmann::ordered_json& v) {
  std::string s = plain(v);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

}  // namespace

Format format_from_string(std::string_view name) {
  if (name == "text") return Format::text;
  if (name == "csv") return Format::csv;
  if (name == "json-lines") return Format::json_lines;
  throw ConfigError("unknown format '" + std::string(name) + "'");
}

void write_records(std::ostream& out, Format format, const std::vector<Record>& records) {
  switch (format) {
    case Format::text:
      for (const Record& r : records) {
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? " " : "") << r[i].first << '=' << plain(r[i].second);
        out << '\n';
      }
      break;
    case Format::csv:
      if (records.empty()) break;
      for (std::size_t i = 0; i < records.front().size(); ++i) out << (i ? "," : "") << records.front()[i].first;
      out << '\n';
      for (const Record& r : records) {
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << csv_cell(r[i].second);
        out << '\n';
      }
      break;
    case Format::json_lines:
      for (const Record& r : records) {
        nlohmann::ordered_json j = nlohmann::ordered_json::object();
        for (const auto& [k, v] : r) j[k] = v;
        out << j.dump() << '\n';
      }
      break;
  }
}

}  // namespace fibermon::cli
