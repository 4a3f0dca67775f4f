// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "aladin/autodiff/graph.hpp"
#include "json.hpp"

namespace aladin {

/// Binary parameter checkpoint.
///
/// Layout: the 5-byte magic "ALDN1", a little-endian uint64 header length,
/// a UTF-8 JSON header {"magic", "dtype", "parameters": [{"name","shape"}],
/// "config": {...}}, then every parameter's raw little-endian values in
/// header order.
struct CheckpointHeader {
  DType dtype = DType::Float32;
  nlohmann::json parameters = nlohmann::json::array();
  nlohmann::json config = nlohmann::json::object();
};

template <class T>
void save_checkpoint(const std::string& path, const ParameterSet<T>& params,
                     const nlohmann::json& config);

// Reads the header only.
CheckpointHeader read_checkpoint_header(const std::string& path);

// Loads values into an existing set whose names and shapes must match the
// file. Stored values are converted if the file dtype differs from T.
// Returns the embedded config.
template <class T>
nlohmann::json load_checkpoint(const std::string& path, ParameterSet<T>& params);

}  // namespace aladin
