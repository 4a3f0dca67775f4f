// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#include "aladin/train/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "aladin/core/errors.hpp"

namespace aladin {

std::vector<std::size_t> eligible_groups(const GroupedDataset& ds) {
  std::vector<std::size_t> out;
  for (std::size_t g = 0; g < ds.groups.size(); ++g) {
    if (ds.groups[g].size() >= 2) out.push_back(g);
  }
  return out;
}

template <class T>
GroupBatch<T> batch_from_groups(const GroupedDataset& ds, const std::vector<std::size_t>& groups,
                                Rng& rng) {
  if (ds.images.rank() != 4) throw DimensionError("dataset images must be [M,3,S,S]");
  GroupBatch<T> batch;
  const std::size_t per = ds.images.numel() / ds.images.dim(0);
  Shape shape = ds.images.shape();
  shape[0] = 2 * groups.size();
  batch.images = Tensor<T>(shape);
  T* dst = batch.images.raw();
  for (std::size_t g : groups) {
    const auto& members = ds.groups.at(g);
    if (members.size() < 2) throw DataError("group " + std::to_string(g) + " has fewer than 2 images");
    for (std::size_t pick : rng.sample_without_replacement(members.size(), 2)) {
      const std::size_t img = members[pick];
      const float* src = ds.images.raw() + img * per;
      for (std::size_t k = 0; k < per; ++k) *dst++ = static_cast<T>(src[k]);
      batch.group_ids.push_back(static_cast<int>(g));
      batch.source.push_back(img);
    }
  }
  return batch;
}

template <class T>
GroupBatch<T> sample_group_batch(const GroupedDataset& ds, std::size_t n, Rng& rng) {
  if (n < 2) throw UsageError("sample_group_batch: N must be >= 2 (no negatives otherwise)");
  const auto pool = eligible_groups(ds);
  if (pool.size() < n) {
    throw DataError("sample_group_batch: need " + std::to_string(n) +
                    " groups with >= 2 images, dataset has " + std::to_string(pool.size()));
  }
  std::vector<std::size_t> chosen;
  for (std::size_t k : rng.sample_without_replacement(pool.size(), n)) chosen.push_back(pool[k]);
  return batch_from_groups<T>(ds, chosen, rng);
}

HardNegativeResult hard_negative_sample(const std::vector<std::size_t>& candidates,
                                        const Tensor<float>& anchor, const Tensor<float>& semantic,
                                        double threshold, Rng& rng, HardNegativeStats* stats) {
  if (candidates.empty()) throw UsageError("hard_negative_sample: no candidates");
  if (semantic.rank() != 2 || anchor.numel() != semantic.dim(1)) {
    throw DimensionError("hard_negative_sample: anchor/semantic dimension mismatch");
  }
  const std::size_t d = semantic.dim(1);
  std::vector<std::size_t> close;
  for (std::size_t c : candidates) {
    double dist2 = 0;
    for (std::size_t k = 0; k < d; ++k) {
      const double diff = double(semantic[c * d + k]) - anchor[k];
      dist2 += diff * diff;
    }
    if (std::sqrt(dist2) < threshold) close.push_back(c);
  }
  const bool fallback = close.empty();
  const auto& pool = fallback ? candidates : close;
  if (stats) {
    ++stats->drawn;
    if (fallback) ++stats->fallbacks;
  }
  return {pool[rng.uniform_index(pool.size())], fallback};
}

Tensor<float> group_semantic_centroids(const GroupedDataset& ds, const Tensor<float>& per_image) {
  if (per_image.rank() != 2 || per_image.dim(0) != ds.num_images()) {
    throw DimensionError("group_semantic_centroids: need one embedding row per image");
  }
  const std::size_t d = per_image.dim(1);
  Tensor<float> out = Tensor<float>::zeros({ds.num_groups(), d});
  for (std::size_t g = 0; g < ds.num_groups(); ++g) {
    const auto& members = ds.groups[g];
    if (members.empty()) continue;
    for (std::size_t k = 0; k < d; ++k) {
      double acc = 0;
      for (std::size_t i : members) acc += per_image[i * d + k];
      out[g * d + k] = static_cast<float>(acc / static_cast<double>(members.size()));
    }
  }
  return out;
}

template <class T>
GroupBatch<T> sample_hard_negative_batch(const GroupedDataset& ds, std::size_t n,
                                         const Tensor<float>& group_semantic, double threshold,
                                         Rng& rng, HardNegativeStats* stats) {
  if (n < 2) throw UsageError("sample_hard_negative_batch: N must be >= 2");
  auto pool = eligible_groups(ds);
  if (pool.size() < n) throw DataError("sample_hard_negative_batch: not enough groups");
  if (group_semantic.rank() != 2 || group_semantic.dim(0) != ds.num_groups()) {
    throw DimensionError("sample_hard_negative_batch: need one semantic row per group");
  }
  const std::size_t seed_pos = rng.uniform_index(pool.size());
  const std::size_t seed = pool[seed_pos];
  pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(seed_pos));
  const Tensor<float> anchor = row(group_semantic, seed);
  std::vector<std::size_t> chosen{seed};
  while (chosen.size() < n) {
    const auto pick = hard_negative_sample(pool, anchor, group_semantic, threshold, rng, stats);
    chosen.push_back(pick.index);
    pool.erase(std::find(pool.begin(), pool.end(), pick.index));
  }
  return batch_from_groups<T>(ds, chosen, rng);
}

template <class T>
void assign_random_negatives(GroupBatch<T>& batch, Rng& rng) {
  const std::size_t b = batch.size();
  batch.negatives.assign(b, 0);
  std::vector<std::size_t> others;
  for (std::size_t i = 0; i < b; ++i) {
    others.clear();
    for (std::size_t j = 0; j < b; ++j) {
      if (batch.group_ids[j] != batch.group_ids[i]) others.push_back(j);
    }
    if (others.empty()) throw UsageError("assign_random_negatives: batch has a single group");
    batch.negatives[i] = others[rng.uniform_index(others.size())];
  }
}

#define ALADIN_INSTANTIATE_SAMPLING(T)                                                     \
  template GroupBatch<T> sample_group_batch<T>(const GroupedDataset&, std::size_t, Rng&);  \
  template GroupBatch<T> batch_from_groups<T>(const GroupedDataset&,                       \
                                              const std::vector<std::size_t>&, Rng&);      \
  template GroupBatch<T> sample_hard_negative_batch<T>(                                    \
      const GroupedDataset&, std::size_t, const Tensor<float>&, double, Rng&,              \
      HardNegativeStats*);                                                                 \
  template void assign_random_negatives<T>(GroupBatch<T>&, Rng&);

ALADIN_INSTANTIATE_SAMPLING(float)
ALADIN_INSTANTIATE_SAMPLING(double)

#undef ALADIN_INSTANTIATE_SAMPLING

}  // namespace aladin
