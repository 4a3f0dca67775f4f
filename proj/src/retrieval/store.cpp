// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#include "aladin/retrieval/store.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "aladin/core/errors.hpp"

namespace aladin {

static_assert(std::endian::native == std::endian::little,
              "embedding store I/O assumes a little-endian host");

void save_embeddings(const std::string& path, const EmbeddingStore& store) {
  if (store.vectors.rank() != 2 || store.vectors.dim(0) != store.ids.size()) {
    throw DimensionError("save_embeddings: one id per vector row");
  }
  nlohmann::json j;
  j["count"] = store.ids.size();
  j["dim"] = store.vectors.dim(1);
  j["metric"] = store.metric;
  j["ids"] = store.ids;
  j["meta"] = store.meta;
  const std::string text = j.dump();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot write '" + path + "'");
  os.write("EMB1", 4);
  const std::uint64_t len = text.size();
  os.write(reinterpret_cast<const char*>(&len), sizeof len);
  os.write(text.data(), static_cast<std::streamsize>(len));
  os.write(reinterpret_cast<const char*>(store.vectors.raw()),
           static_cast<std::streamsize>(store.vectors.numel() * sizeof(float)));
  if (!os) throw FormatError("short write to '" + path + "'");
}

EmbeddingStore load_embeddings(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open '" + path + "'");
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "EMB1", 4) != 0) {
    throw FormatError("'" + path + "' is not an EMB1 embedding store");
  }
  std::uint64_t len = 0;
  is.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!is || len > (1ULL << 34)) throw FormatError("embedding store: bad header length");
  std::string text(len, '\0');
  is.read(text.data(), static_cast<std::streamsize>(len));
  if (!is) throw FormatError("embedding store: truncated header");
  EmbeddingStore store;
  std::size_t count = 0, dim = 0;
  try {
    const auto j = nlohmann::json::parse(text);
    count = j.at("count").get<std::size_t>();
    dim = j.at("dim").get<std::size_t>();
    store.metric = j.at("metric").get<std::string>();
    store.ids = j.at("ids").get<std::vector<std::int64_t>>();
    store.meta = j.value("meta", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("embedding store: bad header: ") + e.what());
  }
  if (store.ids.size() != count) throw FormatError("embedding store: id count mismatch");
  store.vectors = Tensor<float>({count, dim});
  is.read(reinterpret_cast<char*>(store.vectors.raw()),
          static_cast<std::streamsize>(count * dim * sizeof(float)));
  if (!is) throw FormatError("embedding store: truncated vector data");
  if (is.peek() != std::char_traits<char>::eof()) throw FormatError("embedding store: trailing bytes");
  return store;
}

}  // namespace aladin
