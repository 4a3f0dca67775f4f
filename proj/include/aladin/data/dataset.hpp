// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "aladin/autodiff/tensor.hpp"

namespace aladin {

/// Images plus their grouping, as seen by training and evaluation.
///
/// `groups[g]` lists indices into `images`. An image may belong to no group.
/// Nothing here carries a style label: supervision is group co-membership.
struct GroupedDataset {
  Tensor<float> images;  // [M, 3, S, S], values in [0, 1]
  std::vector<std::vector<std::size_t>> groups;
  // Content category per image, -1 when unknown. Used only by the semantic
  // encoder and hard-negative sampling.
  std::vector<int> semantic;

  std::size_t num_images() const { return images.empty() ? 0 : images.dim(0); }
  std::size_t num_groups() const { return groups.size(); }

  // Group index per image, -1 for unassigned images.
  std::vector<int> group_of_image() const {
    std::vector<int> out(num_images(), -1);
    for (std::size_t g = 0; g < groups.size(); ++g) {
      for (std::size_t i : groups[g]) out[i] = static_cast<int>(g);
    }
    return out;
  }
};

// The listed groups with their images, re-indexed from zero.
inline GroupedDataset subset_groups(const GroupedDataset& ds, const std::vector<std::size_t>& which) {
  GroupedDataset out;
  std::vector<Tensor<float>> imgs;
  for (std::size_t g : which) {
    std::vector<std::size_t> members;
    for (std::size_t i : ds.groups.at(g)) {
      members.push_back(imgs.size());
      imgs.push_back(row(ds.images, i));
      out.semantic.push_back(ds.semantic.empty() ? -1 : ds.semantic[i]);
    }
    out.groups.push_back(std::move(members));
  }
  if (!imgs.empty()) out.images = stack<float>(imgs);
  return out;
}

}  // namespace aladin
