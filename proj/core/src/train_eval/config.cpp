// SPDX-License-Identifier: Apache-2.0
#include "fibermon/train_eval/config.hpp"

#include "fibermon/error.hpp"
#include "util/json_util.hpp"

#include <cmath>

namespace fibermon::train_eval {

using util::json;

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("train.batch_size must be positive");
  if (hidden1 == 0 || hidden2 == 0 || attention == 0) throw ConfigError("train hidden sizes must be positive");
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0) || !std::isfinite(lambda1) || !std::isfinite(lambda2)) {
    throw ConfigError("train.lambda1 and train.lambda2 must be finite and non-negative");
  }
  if (!(clip_norm >= 0.0) || !std::isfinite(clip_norm)) throw ConfigError("train.clip_norm must be >= 0");
  try {
    adam.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("train: ") + e.what());
  }
}

TrainConfig train_config_from_json(std::string_view text) {
  const json j = util::parse_json(text, "train config");
  util::StrictObject o(j, "train");
  TrainConfig c;
  const auto read_count = [&](const char* key, std::size_t& out) {
    long long v = static_cast<long long>(out);
    o.optional(key, v);
    if (v < 0) throw ConfigError(std::string("train.") + key + " must be non-negative");
    out = static_cast<std::size_t>(v);
  };
  read_count("epochs", c.epochs);
  read_count("batch_size", c.batch_size);
  o.optional("learning_rate", c.adam.learning_rate);
  o.optional("beta1", c.adam.beta1);
  o.optional("beta2", c.adam.beta2);
  o.optional("epsilon", c.adam.epsilon);
  o.optional("lambda1", c.lambda1);
  o.optional("lambda2", c.lambda2);
  o.optional("seed", c.seed);
  read_count("patience", c.patience);
  o.optional("clip_norm", c.clip_norm);
  read_count("hidden1", c.hidden1);
  read_count("hidden2", c.hidden2);
  read_count("attention", c.attention);
  o.finish();
  c.validate();
  return c;
}

std::string to_json(const TrainConfig& c) {
  json j;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["learning_rate"] = c.adam.learning_rate;
  j["beta1"] = c.adam.beta1;
  j["beta2"] = c.adam.beta2;
  j["epsilon"] = c.adam.epsilon;
  j["lambda1"] = c.lambda1;
  j["lambda2"] = c.lambda2;
  j["seed"] = c.seed;
  j["patience"] = c.patience;
  j["clip_norm"] = c.clip_norm;
  j["hidden1"] = c.hidden1;
  j["hidden2"] = c.hidden2;
  j["attention"] = c.attention;
  return j.dump();
}

}  // namespace fibermon::train_eval
