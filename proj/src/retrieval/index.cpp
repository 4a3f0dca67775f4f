// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#include "aladin/retrieval/index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "aladin/core/errors.hpp"

namespace aladin {

namespace {

double unit_into(const float* src, std::size_t d, double* dst) {
  double n2 = 0;
  for (std::size_t k = 0; k < d; ++k) n2 += double(src[k]) * src[k];
  const double n = std::sqrt(n2);
  for (std::size_t k = 0; k < d; ++k) dst[k] = n > 0 ? src[k] / n : 0.0;
  return n;
}

bool ranks_before(const Hit& a, const Hit& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.id < b.id;
}

}  // namespace

EmbeddingIndex::EmbeddingIndex(std::vector<std::int64_t> ids, const Tensor<float>& vectors)
    : ids_(std::move(ids)) {
  if (vectors.rank() != 2) throw DimensionError("EmbeddingIndex: vectors must be [n, d]");
  if (vectors.dim(0) != ids_.size()) throw DimensionError("EmbeddingIndex: one id per row");
  if (!vectors.all_finite()) throw NumericError("EmbeddingIndex: non-finite vector");
  if (std::unordered_set<std::int64_t>(ids_.begin(), ids_.end()).size() != ids_.size()) {
    throw UsageError("EmbeddingIndex: duplicate ids");
  }
  dim_ = vectors.dim(1);
  unit_.resize(ids_.size() * dim_);
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    unit_into(vectors.raw() + i * dim_, dim_, unit_.data() + i * dim_);
  }
}

EmbeddingIndex::EmbeddingIndex(const Tensor<float>& vectors)
    : EmbeddingIndex(
          [&] {
            std::vector<std::int64_t> ids(vectors.rank() == 2 ? vectors.dim(0) : 0);
            std::iota(ids.begin(), ids.end(), 0);
            return ids;
          }(),
          vectors) {}

std::vector<Hit> EmbeddingIndex::rank_all(const float* vec, std::size_t d,
                                          const std::int64_t* exclude) const {
  if (d != dim_) {
    throw DimensionError("query dimension " + std::to_string(d) + " != index dimension " +
                         std::to_string(dim_));
  }
  std::vector<double> q(d);
  unit_into(vec, d, q.data());
  std::vector<Hit> hits;
  hits.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (exclude && ids_[i] == *exclude) continue;
    const double* r = unit_.data() + i * dim_;
    double s = 0;
    for (std::size_t k = 0; k < d; ++k) s += q[k] * r[k];
    hits.push_back({ids_[i], s});
  }
  std::sort(hits.begin(), hits.end(), ranks_before);
  return hits;
}

std::vector<Hit> EmbeddingIndex::query(const float* vec, std::size_t d, std::size_t k,
                                       const std::int64_t* exclude) const {
  auto hits = rank_all(vec, d, exclude);
  if (k > hits.size()) {
    throw UsageError("query: k=" + std::to_string(k) + " exceeds " + std::to_string(hits.size()) +
                     " candidates");
  }
  hits.resize(k);
  return hits;
}

std::size_t EmbeddingIndex::position(std::int64_t id) const {
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (ids_[i] == id) return i;
  }
  throw UsageError("id " + std::to_string(id) + " not in index");
}

}  // namespace aladin
