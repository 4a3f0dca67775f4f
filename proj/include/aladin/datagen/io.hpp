// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "aladin/autodiff/tensor.hpp"
#include "aladin/datagen/corpus.hpp"

namespace aladin {

// [3, H, W] in [0, 1] as 8-bit RGB. Values are rounded to the nearest level.
void write_png(const std::string& path, const Tensor<float>& image);
Tensor<float> read_png(const std::string& path);

// Writes images/NNNNN.png plus manifest.json under `dir`.
void save_corpus(const std::string& dir, const Corpus& corpus);
// Re-reads a corpus; images come from the PNG files.
Corpus load_corpus(const std::string& dir);
// Rewrites only the manifest (after adding partitions).
void save_manifest(const std::string& dir, const Corpus& corpus);

nlohmann::json corpus_manifest(const Corpus& corpus);

}  // namespace aladin
