// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace fibermon {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor/parameter shapes that do not fit together.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A numeric or data contract was violated (non-finite values, wrong labels
/// in a split, out-of-range arguments).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Invalid or unknown configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Reading or writing a file failed.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A file was readable but its content is malformed or of the wrong version.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace fibermon
