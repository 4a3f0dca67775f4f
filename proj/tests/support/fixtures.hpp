// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "aladin/core/rng.hpp"
#include "aladin/data/dataset.hpp"
#include "aladin/model/aladin_model.hpp"

namespace aladin::testing {

inline AladinConfig tiny_model_config() {
  AladinConfig c;
  c.style_channels = {2, 3};
  c.content_channels = {2, 3};
  c.projection_hidden = 5;
  c.projection_out = 3;
  return c;
}

// Uniform-noise images, `per_group` consecutive images per group.
inline GroupedDataset noise_dataset(std::size_t groups, std::size_t per_group, std::size_t side,
                                    std::uint64_t seed) {
  Rng rng(seed);
  GroupedDataset ds;
  const std::size_t m = groups * per_group;
  ds.images = Tensor<float>({m, 3, side, side});
  for (auto& v : ds.images.data()) v = static_cast<float>(rng.uniform(0.0, 1.0));
  for (std::size_t g = 0; g < groups; ++g) {
    std::vector<std::size_t> members;
    for (std::size_t k = 0; k < per_group; ++k) members.push_back(g * per_group + k);
    ds.groups.push_back(members);
  }
  ds.semantic.assign(m, -1);
  return ds;
}

}  // namespace aladin::testing
