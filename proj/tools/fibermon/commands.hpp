// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "output.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace fibermon::cli {

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitConfig = 2,    // bad flags or configuration
  kExitContract = 3,  // data violates a command's contract
  kExitIo = 4,        // unreadable or unwritable files
  kExitFormat = 5,    // malformed dataset or model file
};

struct Options {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> data;
  std::optional<std::string> model;
  std::optional<std::string> ae_model;
  std::optional<std::string> diag_model;
  std::string format = "text";
  bool quiet = false;
};

struct Streams {
  std::ostream& out;
  std::ostream& err;
  std::istream& in;
};

// Each command throws fibermon errors; main maps them to exit codes.
void cmd_generate(const Options& o, Streams io);
void cmd_train_ae(const Options& o, Streams io);
void cmd_train_diag(const Options& o, Streams io);
void cmd_calibrate(const Options& o, Streams io);
void cmd_eval(const Options& o, Streams io);
void cmd_detect(const Options& o, Streams io);

}  // namespace fibermon::cli
