// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#include "aladin/retrieval/metrics.hpp"

#include <cstdio>

#include "aladin/core/errors.hpp"

namespace aladin {

double ir_top_k(const std::vector<RelevanceList>& lists, std::size_t k) {
  if (lists.empty()) return 0.0;
  std::size_t found = 0;
  for (const auto& l : lists) {
    for (std::size_t r = 0; r < k && r < l.size(); ++r) {
      if (l[r]) {
        ++found;
        break;
      }
    }
  }
  return double(found) / double(lists.size());
}

double average_precision(const RelevanceList& list) {
  std::size_t hits = 0;
  double acc = 0;
  for (std::size_t r = 0; r < list.size(); ++r) {
    if (!list[r]) continue;
    ++hits;
    acc += double(hits) / double(r + 1);
  }
  return hits ? acc / double(hits) : 0.0;
}

double mean_ap(const std::vector<RelevanceList>& lists) {
  if (lists.empty()) return 0.0;
  double acc = 0;
  for (const auto& l : lists) acc += average_precision(l);
  return acc / double(lists.size());
}

double precision_at_k(const RelevanceList& list, std::size_t k) {
  if (k == 0) throw UsageError("precision_at_k: k must be >= 1");
  std::size_t hits = 0;
  for (std::size_t r = 0; r < k && r < list.size(); ++r) hits += list[r] ? 1 : 0;
  return double(hits) / double(k);
}

double mean_precision_at_k(const std::vector<RelevanceList>& lists, std::size_t k) {
  if (lists.empty()) return 0.0;
  double acc = 0;
  for (const auto& l : lists) acc += precision_at_k(l, k);
  return acc / double(lists.size());
}

std::vector<Hit> held_out_filter(const std::vector<Hit>& ranking,
                                 const std::vector<int>& item_group, int query_group) {
  std::vector<Hit> out;
  out.reserve(ranking.size());
  for (const Hit& h : ranking) {
    if (item_group.at(static_cast<std::size_t>(h.id)) != query_group) out.push_back(h);
  }
  return out;
}

nlohmann::json RetrievalReport::to_json() const {
  return {{"ir_top_k", {{"1", ir_top1}, {"5", ir_top5}, {"10", ir_top10}}},
          {"map", map},
          {"p_at_k", {{"1", p_at1}, {"5", p_at5}, {"10", p_at10}}},
          {"queries", queries},
          {"held_out", held_out}};
}

std::string RetrievalReport::csv_header() const {
  return "ir_top1,ir_top5,ir_top10,map,p_at1,p_at5,p_at10,queries,held_out";
}

std::string RetrievalReport::csv_row() const {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%zu,%d", ir_top1, ir_top5,
                ir_top10, map, p_at1, p_at5, p_at10, queries, held_out ? 1 : 0);
  return buf;
}

RetrievalReport evaluate_retrieval(const Tensor<float>& vectors, const std::vector<int>& group,
                                   const std::vector<int>& relevance_label,
                                   const EvalOptions& opt) {
  if (vectors.rank() != 2 || vectors.dim(0) != group.size()) {
    throw DimensionError("evaluate_retrieval: one group label per vector");
  }
  if (opt.held_out && relevance_label.size() != group.size()) {
    throw DimensionError("evaluate_retrieval: held-out mode needs one relevance label per vector");
  }
  const EmbeddingIndex index(vectors);
  const std::size_t d = vectors.dim(1);
  std::vector<RelevanceList> lists;
  for (std::size_t q = 0; q < group.size(); ++q) {
    if (group[q] < 0) continue;
    const std::int64_t self = static_cast<std::int64_t>(q);
    auto ranking = index.rank_all(vectors.raw() + q * d, d, &self);
    if (opt.held_out) ranking = held_out_filter(ranking, group, group[q]);
    const std::vector<int>& label = opt.held_out ? relevance_label : group;
    RelevanceList rel(ranking.size());
    bool any = false;
    for (std::size_t r = 0; r < ranking.size(); ++r) {
      const int l = label[static_cast<std::size_t>(ranking[r].id)];
      rel[r] = l >= 0 && l == label[q];
      any = any || rel[r];
    }
    if (any) lists.push_back(std::move(rel));
  }
  RetrievalReport rep;
  rep.ir_top1 = ir_top_k(lists, 1);
  rep.ir_top5 = ir_top_k(lists, 5);
  rep.ir_top10 = ir_top_k(lists, 10);
  rep.map = mean_ap(lists);
  rep.p_at1 = mean_precision_at_k(lists, 1);
  rep.p_at5 = mean_precision_at_k(lists, 5);
  rep.p_at10 = mean_precision_at_k(lists, 10);
  rep.queries = lists.size();
  rep.held_out = opt.held_out;
  return rep;
}

std::size_t rank_of(const std::vector<Hit>& ranking, std::int64_t target) {
  for (std::size_t r = 0; r < ranking.size(); ++r) {
    if (ranking[r].id == target) return r + 1;
  }
  return 0;
}

}  // namespace aladin
