// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "aladin/model/trainable.hpp"
#include "aladin/retrieval/index.hpp"

namespace aladin {

// Arithmetic mean of the rows of `codes` ([m, d], m >= 1).
std::vector<float> mean_query_vector(const Tensor<float>& codes);

// Ranks the index against the mean of the given per-image codes. Ids in
// `exclude` (typically the query images themselves) are dropped.
std::vector<Hit> multi_image_query(const EmbeddingIndex& index, const Tensor<float>& codes,
                                   const std::vector<std::int64_t>& exclude = {});

// Encodes the images with the model's retrieval embedding, then queries.
std::vector<Hit> multi_image_query(const EmbeddingIndex& index, const Tensor<float>& images,
                                   TrainableModel<float>& encoder,
                                   const std::vector<std::int64_t>& exclude = {});

struct MultiImageResult {
  double median_multi_rank = 0;   // held-out member under the mean query
  double median_single_rank = 0;  // median of the per-group single-query medians
  std::size_t groups = 0;
};

// For every group with more than `k` members: its first k rows query the
// corpus together and one at a time, and the rank of member k is recorded.
// The k query rows are excluded from every ranking.
MultiImageResult multi_image_experiment(const Tensor<float>& vectors, const std::vector<int>& group,
                                        std::size_t k);

double median(std::vector<double> values);

// Row-wise: L2-normalize each part, then concatenate. [n, d1] x [n, d2] -> [n, d1 + d2].
Tensor<float> fuse(const Tensor<float>& style, const Tensor<float>& semantic);

}  // namespace aladin
