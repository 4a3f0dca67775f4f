// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aladin/autodiff/tensor.hpp"
#include "json.hpp"

namespace aladin {

/// Embedding store file: "EMB1", uint64 little-endian header length, a JSON
/// header {count, dim, metric, ids, meta}, then count*dim little-endian
/// float32 values, row-major.
struct EmbeddingStore {
  std::vector<std::int64_t> ids;
  Tensor<float> vectors;  // [count, dim]
  std::string metric = "cosine";
  nlohmann::json meta = nlohmann::json::object();
};

void save_embeddings(const std::string& path, const EmbeddingStore& store);
EmbeddingStore load_embeddings(const std::string& path);

}  // namespace aladin
