// SPDX-License-Identifier: Apache-2.0
#include "fibermon/models/model_io.hpp"

#include "fibermon/error.hpp"
#include "util/json_util.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace fibermon::models {

using util::json;

namespace {

constexpr std::string_view kMagic = "FIBERMON";

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

std::uint64_t get_le(std::string_view bytes, std::size_t offset, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  }
  return v;
}

template <class Model>
json blocks_json(const Model& m) {
  json blocks = json::array();
  m.visit([&](const std::string& name, const nn::Tensor& t) {
    blocks.push_back({{"name", name}, {"shape", t.shape()}});
  });
  return blocks;
}

template <class Model>
std::string encode(const Model& m, ModelKind kind, json architecture, json metadata) {
  m.validate();
  json header;
  header["kind"] = std::string(to_string(kind));
  header["architecture"] = std::move(architecture);
  header["metadata"] = std::move(metadata);
  header["blocks"] = blocks_json(m);
  const std::string text = header.dump();
  std::string out(kMagic);
  put_u32(out, kModelFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out += text;
  m.visit([&](const std::string&, const nn::Tensor& t) {
    for (double v : t.values()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  });
  return out;
}

struct Container {
  json header;
  std::string_view payload;
};

Container open_container(std::string_view bytes) {
  if (bytes.size() < kMagic.size() + 8 || bytes.substr(0, kMagic.size()) != kMagic) {
    throw FormatError("not a model file (bad magic)");
  }
  const auto version = static_cast<std::uint32_t>(get_le(bytes, kMagic.size(), 4));
  if (version != kModelFormatVersion) {
    throw FormatError("unsupported model format version " + std::to_string(version) + " (expected " +
                      std::to_string(kModelFormatVersion) + ")");
  }
  const auto header_len = static_cast<std::size_t>(get_le(bytes, kMagic.size() + 4, 4));
  const std::size_t header_start = kMagic.size() + 8;
  if (bytes.size() - header_start < header_len) throw FormatError("model file truncated in header");
  Container c;
  try {
    c.header = json::parse(bytes.substr(header_start, header_len));
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("corrupt model header: ") + e.what());
  }
  if (!c.header.is_object()) throw FormatError("corrupt model header: not an object");
  c.payload = bytes.substr(header_start + header_len);
  return c;
}

template <class T>
T header_field(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("model header field '") + key + "': " + e.what());
  }
}

const json& child(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw FormatError(std::string("model header is missing '") + key + "'");
  return j[key];
}

template <class Model>
void fill_blocks(Model& m, const Container& c) {
  const json& blocks = child(c.header, "blocks");
  if (!blocks.is_array()) throw FormatError("model header: blocks must be an array");
  std::size_t index = 0;
  std::size_t offset = 0;
  m.visit([&](const std::string& name, nn::Tensor& t) {
    if (index >= blocks.size()) throw ShapeError("model file is missing block '" + name + "'");
    const json& b = blocks[index++];
    const auto got_name = header_field<std::string>(b, "name");
    const auto got_shape = header_field<nn::Shape>(b, "shape");
    if (got_name != name) throw ShapeError("model block '" + got_name + "' found where '" + name + "' was expected");
    if (got_shape != t.shape()) {
      throw ShapeError("model block '" + name + "' has shape " + nn::shape_string(got_shape) + ", architecture needs " +
                       nn::shape_string(t.shape()));
    }
    const std::size_t need = t.size() * 8;
    if (c.payload.size() - offset < need) throw FormatError("model file truncated in block '" + name + "'");
    for (double& v : t.values()) {
      v = std::bit_cast<double>(get_le(c.payload, offset, 8));
      offset += 8;
    }
  });
  if (index != blocks.size()) throw ShapeError("model file has unexpected extra blocks");
  if (offset != c.payload.size()) throw FormatError("model file has trailing bytes after the payload");
}

void require_kind(const Container& c, ModelKind want) {
  const auto kind = header_field<std::string>(c.header, "kind");
  if (kind != to_string(want)) {
    throw FormatError("model file holds a '" + kind + "' model, expected '" + std::string(to_string(want)) + "'");
  }
}

std::size_t positive_size(const json& arch, const char* key) {
  const auto v = header_field<std::size_t>(arch, key);
  if (v == 0) throw ShapeError(std::string("model architecture '") + key + "' must be positive");
  return v;
}

}  // namespace

std::string_view to_string(ModelKind k) { return k == ModelKind::autoencoder ? "autoencoder" : "diagnosis"; }

std::string encode_model(const AeModel& m) {
  json arch{{"hidden1", m.arch.hidden1}, {"hidden2", m.arch.hidden2}};
  json meta{{"snr_min_db", m.meta.snr_min_db},
            {"snr_max_db", m.meta.snr_max_db},
            {"seed", m.meta.seed},
            {"config_hash", m.meta.config_hash},
            {"theta", m.meta.theta ? json(*m.meta.theta) : json(nullptr)}};
  return encode(m, ModelKind::autoencoder, std::move(arch), std::move(meta));
}

std::string encode_model(const DiagModel& m) {
  json arch{{"hidden1", m.arch.hidden1}, {"hidden2", m.arch.hidden2}, {"attention", m.arch.attention}};
  json meta{{"seed", m.meta.seed},
            {"config_hash", m.meta.config_hash},
            {"lambda1", m.meta.lambda1},
            {"lambda2", m.meta.lambda2}};
  return encode(m, ModelKind::diagnosis, std::move(arch), std::move(meta));
}

ModelKind peek_model_kind(std::string_view bytes) {
  const Container c = open_container(bytes);
  const auto kind = header_field<std::string>(c.header, "kind");
  if (kind == "autoencoder") return ModelKind::autoencoder;
  if (kind == "diagnosis") return ModelKind::diagnosis;
  throw FormatError("unknown model kind '" + kind + "'");
}

AeModel decode_ae_model(std::string_view bytes) {
  const Container c = open_container(bytes);
  require_kind(c, ModelKind::autoencoder);
  const json& arch = child(c.header, "architecture");
  AeArchitecture a{positive_size(arch, "hidden1"), positive_size(arch, "hidden2")};
  AeModel m = AeModel::zeros(a);
  const json& meta = child(c.header, "metadata");
  m.meta.snr_min_db = header_field<double>(meta, "snr_min_db");
  m.meta.snr_max_db = header_field<double>(meta, "snr_max_db");
  m.meta.seed = header_field<std::uint64_t>(meta, "seed");
  m.meta.config_hash = header_field<std::string>(meta, "config_hash");
  if (!child(meta, "theta").is_null()) m.meta.theta = header_field<double>(meta, "theta");
  fill_blocks(m, c);
  return m;
}

DiagModel decode_diag_model(std::string_view bytes) {
  const Container c = open_container(bytes);
  require_kind(c, ModelKind::diagnosis);
  const json& arch = child(c.header, "architecture");
  DiagArchitecture a{positive_size(arch, "hidden1"), positive_size(arch, "hidden2"), positive_size(arch, "attention")};
  DiagModel m = DiagModel::zeros(a);
  const json& meta = child(c.header, "metadata");
  m.meta.seed = header_field<std::uint64_t>(meta, "seed");
  m.meta.config_hash = header_field<std::string>(meta, "config_hash");
  m.meta.lambda1 = header_field<double>(meta, "lambda1");
  m.meta.lambda2 = header_field<double>(meta, "lambda2");
  fill_blocks(m, c);
  return m;
}

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path.string());
  return ss.str();
}

void write_file_bytes(const std::filesystem::path& path, std::string_view bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

void save_model(const AeModel& model, const std::filesystem::path& path) { write_file_bytes(path, encode_model(model)); }
void save_model(const DiagModel& model, const std::filesystem::path& path) { write_file_bytes(path, encode_model(model)); }

AeModel load_ae_model(const std::filesystem::path& path) {
  try {
    return decode_ae_model(read_file_bytes(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

DiagModel load_diag_model(const std::filesystem::path& path) {
  try {
    return decode_diag_model(read_file_bytes(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace fibermon::models
