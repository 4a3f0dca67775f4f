// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "aladin/autodiff/tensor.hpp"
#include "aladin/core/rng.hpp"
#include "aladin/data/dataset.hpp"

namespace aladin {

/// 2N images from N distinct groups; rows 2i and 2i+1 share a group.
template <class T>
struct GroupBatch {
  Tensor<T> images;                 // [2N, 3, H, W]
  std::vector<int> group_ids;       // dataset group index per row
  std::vector<std::size_t> source;  // dataset image index per row
  // Triplet negative row per anchor row; empty unless assigned.
  std::vector<std::size_t> negatives;

  std::size_t size() const { return group_ids.size(); }
  std::size_t num_groups() const { return group_ids.size() / 2; }
};

// Indices of groups with at least two members.
std::vector<std::size_t> eligible_groups(const GroupedDataset& ds);

template <class T>
GroupBatch<T> sample_group_batch(const GroupedDataset& ds, std::size_t n, Rng& rng);

// Builds a batch from an explicit list of groups, two members drawn per group.
template <class T>
GroupBatch<T> batch_from_groups(const GroupedDataset& ds, const std::vector<std::size_t>& groups,
                                Rng& rng);

struct HardNegativeStats {
  std::size_t drawn = 0;
  std::size_t fallbacks = 0;
};

struct HardNegativeResult {
  std::size_t index;  // element of `candidates`
  bool fallback;      // no candidate fell under the threshold
};

// Uniform draw among candidates whose semantic distance to the anchor is
// below `threshold`; uniform over all candidates when none qualifies.
// `semantic` holds one row per candidate id.
HardNegativeResult hard_negative_sample(const std::vector<std::size_t>& candidates,
                                        const Tensor<float>& anchor, const Tensor<float>& semantic,
                                        double threshold, Rng& rng,
                                        HardNegativeStats* stats = nullptr);

// Mean semantic embedding of each group's members: [G, d].
Tensor<float> group_semantic_centroids(const GroupedDataset& ds, const Tensor<float>& per_image);

// A batch whose groups are semantically close to a randomly drawn seed group.
template <class T>
GroupBatch<T> sample_hard_negative_batch(const GroupedDataset& ds, std::size_t n,
                                         const Tensor<float>& group_semantic, double threshold,
                                         Rng& rng, HardNegativeStats* stats = nullptr);

// Assigns each row a negative row from another group, uniformly at random.
template <class T>
void assign_random_negatives(GroupBatch<T>& batch, Rng& rng);

}  // namespace aladin
