// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "fibermon/models/ae_model.hpp"
#include "fibermon/models/diag_model.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace fibermon::models {

/// Container layout (all integers little-endian):
///   8 bytes   "FIBERMON"
///   u32       format version
///   u32       header length n
///   n bytes   JSON header {"kind","architecture","metadata","blocks":[{"name","shape"}]}
///   payload   float64 values of every block, in header order
inline constexpr std::uint32_t kModelFormatVersion = 1;

enum class ModelKind { autoencoder, diagnosis };
std::string_view to_string(ModelKind k);

std::string encode_model(const AeModel& model);
std::string encode_model(const DiagModel& model);
AeModel decode_ae_model(std::string_view bytes);
DiagModel decode_diag_model(std::string_view bytes);
/// Kind recorded in a container, without decoding its parameters.
ModelKind peek_model_kind(std::string_view bytes);

/// Writes via a temporary file and rename. Throws IoError.
void save_model(const AeModel& model, const std::filesystem::path& path);
void save_model(const DiagModel& model, const std::filesystem::path& path);
/// Throw IoError when unreadable, FormatError for a bad magic, version,
/// kind or truncated payload, ShapeError for inconsistent block shapes.
AeModel load_ae_model(const std::filesystem::path& path);
DiagModel load_diag_model(const std::filesystem::path& path);

std::string read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::string_view bytes);

}  // namespace fibermon::models
