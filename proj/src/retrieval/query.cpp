// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#include "aladin/retrieval/query.hpp"

#include <algorithm>
#include <cmath>

#include "aladin/core/errors.hpp"
#include "aladin/retrieval/metrics.hpp"

namespace aladin {

std::vector<float> mean_query_vector(const Tensor<float>& codes) {
  if (codes.rank() != 2 || codes.dim(0) == 0) {
    throw UsageError("multi-image query needs at least one image");
  }
  const std::size_t m = codes.dim(0), d = codes.dim(1);
  std::vector<float> out(d);
  for (std::size_t k = 0; k < d; ++k) {
    double acc = 0;
    for (std::size_t i = 0; i < m; ++i) acc += codes[i * d + k];
    out[k] = static_cast<float>(acc / double(m));
  }
  return out;
}

std::vector<Hit> multi_image_query(const EmbeddingIndex& index, const Tensor<float>& codes,
                                   const std::vector<std::int64_t>& exclude) {
  const auto q = mean_query_vector(codes);
  auto hits = index.rank_all(q.data(), q.size());
  if (!exclude.empty()) {
    std::erase_if(hits, [&](const Hit& h) {
      return std::find(exclude.begin(), exclude.end(), h.id) != exclude.end();
    });
  }
  return hits;
}

std::vector<Hit> multi_image_query(const EmbeddingIndex& index, const Tensor<float>& images,
                                   TrainableModel<float>& encoder,
                                   const std::vector<std::int64_t>& exclude) {
  return multi_image_query(index, encoder.retrieval_embedding(images), exclude);
}

double median(std::vector<double> values) {
  if (values.empty()) throw UsageError("median of nothing");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

MultiImageResult multi_image_experiment(const Tensor<float>& vectors, const std::vector<int>& group,
                                        std::size_t k) {
  if (k == 0) throw UsageError("multi_image_experiment: k must be >= 1");
  if (vectors.rank() != 2 || vectors.dim(0) != group.size()) {
    throw DimensionError("multi_image_experiment: one group label per vector");
  }
  const EmbeddingIndex index(vectors);
  const std::size_t d = vectors.dim(1);
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < group.size(); ++i) {
    if (group[i] < 0) continue;
    if (std::size_t(group[i]) >= members.size()) members.resize(std::size_t(group[i]) + 1);
    members[std::size_t(group[i])].push_back(i);
  }
  MultiImageResult res;
  std::vector<double> multi, single;
  for (const auto& m : members) {
    if (m.size() <= k) continue;
    std::vector<std::int64_t> queries(m.begin(), m.begin() + std::ptrdiff_t(k));
    const auto target = static_cast<std::int64_t>(m[k]);
    Tensor<float> codes({k, d});
    for (std::size_t q = 0; q < k; ++q) {
      std::copy_n(vectors.raw() + m[q] * d, d, codes.raw() + q * d);
    }
    multi.push_back(double(rank_of(multi_image_query(index, codes, queries), target)));
    std::vector<double> ranks;
    for (std::size_t q = 0; q < k; ++q) {
      auto hits = index.rank_all(vectors.raw() + m[q] * d, d);
      std::erase_if(hits, [&](const Hit& h) {
        return std::find(queries.begin(), queries.end(), h.id) != queries.end();
      });
      ranks.push_back(double(rank_of(hits, target)));
    }
    single.push_back(median(ranks));
  }
  res.groups = multi.size();
  if (res.groups == 0) return res;
  res.median_multi_rank = median(multi);
  res.median_single_rank = median(single);
  return res;
}

Tensor<float> fuse(const Tensor<float>& style, const Tensor<float>& semantic) {
  if (style.rank() != 2 || semantic.rank() != 2 || style.dim(0) != semantic.dim(0)) {
    throw DimensionError("fuse: expected [n, d1] and [n, d2] with equal n");
  }
  const std::size_t n = style.dim(0), d1 = style.dim(1), d2 = semantic.dim(1);
  Tensor<float> out({n, d1 + d2});
  auto put = [&](const Tensor<float>& src, std::size_t d, std::size_t offset) {
    for (std::size_t i = 0; i < n; ++i) {
      double n2 = 0;
      for (std::size_t k = 0; k < d; ++k) n2 += double(src[i * d + k]) * src[i * d + k];
      const double norm = std::sqrt(n2);
      for (std::size_t k = 0; k < d; ++k) {
        out[i * (d1 + d2) + offset + k] = norm > 0 ? static_cast<float>(src[i * d + k] / norm) : 0.f;
      }
    }
  };
  put(style, d1, 0);
  put(semantic, d2, d1);
  return out;
}

}  // namespace aladin
