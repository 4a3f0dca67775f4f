// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "aladin/autodiff/tensor.hpp"

namespace aladin {

struct Hit {
  std::int64_t id;
  double score;
};

/// Exact cosine-similarity index. Ties rank by ascending id.
class EmbeddingIndex {
 public:
  EmbeddingIndex() = default;
  // vectors: [n, d]; ids unique, one per row.
  EmbeddingIndex(std::vector<std::int64_t> ids, const Tensor<float>& vectors);
  // Ids 0..n-1.
  explicit EmbeddingIndex(const Tensor<float>& vectors);

  std::size_t size() const { return ids_.size(); }
  std::size_t dim() const { return dim_; }
  const std::vector<std::int64_t>& ids() const { return ids_; }

  // Top k by cosine similarity. Entries whose id equals `exclude` are skipped.
  std::vector<Hit> query(const float* vec, std::size_t d, std::size_t k,
                         const std::int64_t* exclude = nullptr) const;
  std::vector<Hit> query(const std::vector<float>& vec, std::size_t k) const {
    return query(vec.data(), vec.size(), k);
  }
  // Full ranking of every stored row except `exclude`.
  std::vector<Hit> rank_all(const float* vec, std::size_t d,
                            const std::int64_t* exclude = nullptr) const;

  // Row index of an id; throws UsageError when absent.
  std::size_t position(std::int64_t id) const;

 private:
  std::vector<std::int64_t> ids_;
  std::vector<double> unit_;  // row-normalized copy; zero rows stay zero
  std::size_t dim_ = 0;
};

}  // namespace aladin
