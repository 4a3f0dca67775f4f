// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#include "aladin/autodiff/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace aladin {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[5] = {'A', 'L', 'D', 'N', '1'};

void write_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t read_u64(std::istream& is) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw FormatError("checkpoint: truncated header length");
  return v;
}

struct RawCheckpoint {
  CheckpointHeader header;
  std::ifstream stream;
};

RawCheckpoint open_checkpoint(const std::string& path) {
  RawCheckpoint raw;
  raw.stream.open(path, std::ios::binary);
  if (!raw.stream) throw FormatError("cannot open checkpoint '" + path + "'");
  char magic[5];
  raw.stream.read(magic, 5);
  if (!raw.stream || std::memcmp(magic, kMagic, 5) != 0) {
    throw FormatError("'" + path + "' is not an ALDN1 checkpoint");
  }
  const std::uint64_t len = read_u64(raw.stream);
  std::string text(len, '\0');
  raw.stream.read(text.data(), static_cast<std::streamsize>(len));
  if (!raw.stream) throw FormatError("checkpoint: truncated JSON header");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint: bad JSON header: ") + e.what());
  }
  if (j.value("magic", "") != "ALDN1") throw FormatError("checkpoint: header magic mismatch");
  raw.header.dtype = parse_dtype(j.at("dtype").get<std::string>());
  raw.header.parameters = j.at("parameters");
  raw.header.config = j.value("config", nlohmann::json::object());
  return raw;
}

template <class Stored, class T>
void read_values(std::istream& is, Tensor<T>& dst) {
  std::vector<Stored> buf(dst.numel());
  is.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size() * sizeof(Stored)));
  if (!is) throw FormatError("checkpoint: truncated parameter data");
  for (std::size_t i = 0; i < buf.size(); ++i) dst[i] = static_cast<T>(buf[i]);
}

}  // namespace

template <class T>
void save_checkpoint(const std::string& path, const ParameterSet<T>& params,
                     const nlohmann::json& config) {
  nlohmann::json j;
  j["magic"] = "ALDN1";
  j["dtype"] = dtype_name(dtype_of<T>());
  j["parameters"] = nlohmann::json::array();
  for (const auto& p : params) {
    j["parameters"].push_back({{"name", p.name}, {"shape", p.value.shape()}});
  }
  j["config"] = config;
  const std::string text = j.dump();

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw FormatError("cannot write checkpoint '" + path + "'");
  os.write(kMagic, 5);
  write_u64(os, text.size());
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& p : params) {
    os.write(reinterpret_cast<const char*>(p.value.raw()),
             static_cast<std::streamsize>(p.value.numel() * sizeof(T)));
  }
  if (!os) throw FormatError("failed writing checkpoint '" + path + "'");
}

CheckpointHeader read_checkpoint_header(const std::string& path) {
  return open_checkpoint(path).header;
}

template <class T>
nlohmann::json load_checkpoint(const std::string& path, ParameterSet<T>& params) {
  RawCheckpoint raw = open_checkpoint(path);
  const auto& entries = raw.header.parameters;
  if (entries.size() != params.size()) {
    throw FormatError("checkpoint has " + std::to_string(entries.size()) +
                      " parameters, model expects " + std::to_string(params.size()));
  }
  std::size_t i = 0;
  for (auto& p : params) {
    const auto& e = entries.at(i++);
    const auto name = e.at("name").get<std::string>();
    const auto shape = e.at("shape").get<Shape>();
    if (name != p.name || shape != p.value.shape()) {
      throw FormatError("checkpoint parameter '" + name + "' " + shape_string(shape) +
                        " does not match model parameter '" + p.name + "' " +
                        shape_string(p.value.shape()));
    }
    if (raw.header.dtype == DType::Float32) {
      read_values<float>(raw.stream, p.value);
    } else {
      read_values<double>(raw.stream, p.value);
    }
    p.zero_grad();
  }
  return raw.header.config;
}

template void save_checkpoint(const std::string&, const ParameterSet<float>&, const nlohmann::json&);
template void save_checkpoint(const std::string&, const ParameterSet<double>&, const nlohmann::json&);
template nlohmann::json load_checkpoint(const std::string&, ParameterSet<float>&);
template nlohmann::json load_checkpoint(const std::string&, ParameterSet<double>&);

}  // namespace aladin
