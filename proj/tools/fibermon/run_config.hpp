// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "fibermon/otdr/dataset.hpp"
#include "fibermon/train_eval/config.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace fibermon::cli {

/// Path slots a run can name. Each one can come from the config file, an
/// environment variable or a command-line flag, in increasing priority.
enum class PathKey { dataset, model, ae_model, diag_model, out };

std::string_view path_key_name(PathKey k);
/// FIBERMON_DATASET, FIBERMON_MODEL, FIBERMON_AE_MODEL, FIBERMON_DIAG_MODEL, FIBERMON_OUT.
std::string_view path_env_var(PathKey k);

/// Contents of a --config file:
///   {"seed": n, "generator": {...}, "train": {...}, "paths": {...}}
/// Every section is optional; unknown keys are rejected.
struct RunConfig {
  std::optional<std::uint64_t> seed;
  std::optional<otdr::GeneratorConfig> generator;
  train_eval::TrainConfig train;
  std::map<PathKey, std::filesystem::path> paths;
};

RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Flag value, else environment variable, else config entry.
std::optional<std::filesystem::path> resolve_path(const RunConfig& config, PathKey key,
                                                  const std::optional<std::string>& flag);
/// As resolve_path, throwing ConfigError naming the flag when nothing is set.
std::filesystem::path require_path(const RunConfig& config, PathKey key, const std::optional<std::string>& flag,
                                   std::string_view flag_name);

/// `model.fmm` + ".loss.csv" -> `model.loss.csv`.
std::filesystem::path sibling_path(const std::filesystem::path& path, std::string_view suffix);

}  // namespace fibermon::cli
