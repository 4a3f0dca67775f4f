// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aladin/autodiff/tensor.hpp"
#include "aladin/retrieval/index.hpp"
#include "json.hpp"

namespace aladin {

// relevance[r] says whether the item at rank r is relevant to the query.
using RelevanceList = std::vector<std::uint8_t>;

// Fraction of queries with a relevant item within the first k ranks.
double ir_top_k(const std::vector<RelevanceList>& lists, std::size_t k);

// Mean of the precision at each relevant rank; 0 for a list without hits.
double average_precision(const RelevanceList& list);
double mean_ap(const std::vector<RelevanceList>& lists);

// Relevant items among the first k, divided by k.
double precision_at_k(const RelevanceList& list, std::size_t k);
double mean_precision_at_k(const std::vector<RelevanceList>& lists, std::size_t k);

// Drops every ranked id in the query's group. item_group is indexed by id.
std::vector<Hit> held_out_filter(const std::vector<Hit>& ranking,
                                 const std::vector<int>& item_group, int query_group);

struct RetrievalReport {
  double ir_top1 = 0, ir_top5 = 0, ir_top10 = 0;
  double map = 0;
  double p_at1 = 0, p_at5 = 0, p_at10 = 0;
  std::size_t queries = 0;
  bool held_out = false;

  nlohmann::json to_json() const;
  std::string csv_header() const;
  std::string csv_row() const;
};

struct EvalOptions {
  // Remove every result in the query's group before scoring; relevance then
  // comes from `relevance_label` instead of the group.
  bool held_out = false;
};

/// Every row of `vectors` with a non-negative group label queries all other
/// rows (ids are row indices). Relevance: same group, or same
/// `relevance_label` in held-out mode. Queries without any relevant
/// candidate are skipped and not counted.
RetrievalReport evaluate_retrieval(const Tensor<float>& vectors, const std::vector<int>& group,
                                   const std::vector<int>& relevance_label,
                                   const EvalOptions& opt = {});

// Rank (1-based) of `target` in a ranking; 0 when absent.
std::size_t rank_of(const std::vector<Hit>& ranking, std::int64_t target);

}  // namespace aladin
