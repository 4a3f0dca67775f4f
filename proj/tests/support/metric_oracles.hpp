// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Definitional metric implementations used as oracles. They work from ids
// and labels rather than from precomputed relevance lists.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "aladin/retrieval/index.hpp"

namespace aladin::testing {

inline std::vector<Hit> scan_oracle(const Tensor<float>& vectors, const float* q,
                                    std::int64_t exclude) {
  const std::size_t n = vectors.dim(0), d = vectors.dim(1);
  double qn = 0;
  for (std::size_t k = 0; k < d; ++k) qn += double(q[k]) * q[k];
  std::vector<Hit> all;
  for (std::size_t i = 0; i < n; ++i) {
    if (static_cast<std::int64_t>(i) == exclude) continue;
    double rn = 0;
    for (std::size_t k = 0; k < d; ++k) rn += double(vectors[i * d + k]) * vectors[i * d + k];
    double s = 0;
    for (std::size_t k = 0; k < d; ++k) {
      s += (q[k] / std::sqrt(qn)) * (vectors[i * d + k] / std::sqrt(rn));
    }
    all.push_back({static_cast<std::int64_t>(i), s});
  }
  // Selection by repeated argmax: best score, then smallest id.
  std::vector<Hit> out;
  while (!all.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < all.size(); ++i) {
      if (all[i].score > all[best].score ||
          (all[i].score == all[best].score && all[i].id < all[best].id)) {
        best = i;
      }
    }
    out.push_back(all[best]);
    all.erase(all.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return out;
}

inline bool oracle_hit_in_top(const std::vector<std::int64_t>& ranking,
                              const std::vector<int>& label, int query_label, std::size_t k) {
  for (std::size_t r = 0; r < std::min(k, ranking.size()); ++r) {
    if (label[static_cast<std::size_t>(ranking[r])] == query_label) return true;
  }
  return false;
}

inline double oracle_ap(const std::vector<std::int64_t>& ranking, const std::vector<int>& label,
                        int query_label) {
  double sum = 0;
  std::size_t relevant_ranks = 0;
  for (std::size_t r = 0; r < ranking.size(); ++r) {
    if (label[static_cast<std::size_t>(ranking[r])] != query_label) continue;
    ++relevant_ranks;
    std::size_t upto = 0;
    for (std::size_t j = 0; j <= r; ++j) {
      upto += label[static_cast<std::size_t>(ranking[j])] == query_label;
    }
    sum += double(upto) / double(r + 1);
  }
  return relevant_ranks ? sum / double(relevant_ranks) : 0.0;
}

inline double oracle_precision(const std::vector<std::int64_t>& ranking,
                               const std::vector<int>& label, int query_label, std::size_t k) {
  std::size_t c = 0;
  for (std::size_t r = 0; r < k && r < ranking.size(); ++r) {
    c += label[static_cast<std::size_t>(ranking[r])] == query_label;
  }
  return double(c) / double(k);
}

}  // namespace aladin::testing
