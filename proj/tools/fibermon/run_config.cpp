// SPDX-License-Identifier: Apache-2.0
#include "run_config.hpp"

#include "fibermon/error.hpp"

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace fibermon::cli {

using json = nlohmann::json;

namespace {

constexpr PathKey kPathKeys[] = {PathKey::dataset, PathKey::model, PathKey::ae_model, PathKey::diag_model,
                                 PathKey::out};

}  // namespace

std::string_view path_key_name(PathKey k) {
  switch (k) {
    case PathKey::dataset: return "dataset";
    case PathKey::model: return "model";
    case PathKey::ae_model: return "ae_model";
    case PathKey::diag_model: return "diag_model";
    case PathKey::out: return "out";
  }
  return "?";
}

std::string_view path_env_var(PathKey k) {
  switch (k) {
    case PathKey::dataset: return "FIBERMON_DATASET";
    case PathKey::model: return "FIBERMON_MODEL";
    case PathKey::ae_model: return "FIBERMON_AE_MODEL";
    case PathKey::diag_model: return "FIBERMON_DIAG_MODEL";
    case PathKey::out: return "FIBERMON_OUT";
  }
  return "?";
}

RunConfig parse_run_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("run config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("run config must be a JSON object");
  RunConfig rc;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const json& v = it.value();
    if (key == "seed") {
      if (!v.is_number_unsigned()) throw ConfigError("run config: seed must be a non-negative integer");
      rc.seed = v.get<std::uint64_t>();
    } else if (key == "generator") {
      rc.generator = otdr::generator_config_from_json(v.dump());
    } else if (key == "train") {
      rc.train = train_eval::train_config_from_json(v.dump());
    } else if (key == "paths") {
      if (!v.is_object()) throw ConfigError("run config: paths must be an object");
      for (auto p = v.begin(); p != v.end(); ++p) {
        bool known = false;
        for (PathKey k : kPathKeys) {
          if (p.key() != path_key_name(k)) continue;
          if (!p.value().is_string()) throw ConfigError("run config: paths." + p.key() + " must be a string");
          rc.paths[k] = p.value().get<std::string>();
          known = true;
        }
        if (!known) throw ConfigError("run config: unknown path '" + p.key() + "'");
      }
    } else {
      throw ConfigError("run config: unknown key '" + key + "'");
    }
  }
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    return parse_run_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::optional<std::filesystem::path> resolve_path(const RunConfig& config, PathKey key,
                                                  const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return std::filesystem::path(*flag);
  const std::string env_name(path_env_var(key));
  if (const char* env = std::getenv(env_name.c_str()); env != nullptr && *env != '\0') {
    return std::filesystem::path(env);
  }
  if (auto it = config.paths.find(key); it != config.paths.end()) return it->second;
  return std::nullopt;
}

std::filesystem::path require_path(const RunConfig& config, PathKey key, const std::optional<std::string>& flag,
                                   std::string_view flag_name) {
  auto p = resolve_path(config, key, flag);
  if (!p) {
    throw ConfigError("missing " + std::string(flag_name) + " (or " + std::string(path_env_var(key)) +
                      ", or paths." + std::string(path_key_name(key)) + " in the config)");
  }
  return *p;
}

std::filesystem::path sibling_path(const std::filesystem::path& path, std::string_view suffix) {
  std::filesystem::path p = path;
  p.replace_extension();
  p += std::string(suffix);
  return p;
}

}  // namespace fibermon::cli
