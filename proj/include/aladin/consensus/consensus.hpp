// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aladin/core/rng.hpp"

namespace aladin {

using ImageId = std::int64_t;

struct VoteRecord {
  std::string project_id;
  std::string worker_id;
  std::vector<ImageId> selected;  // may be empty
};

struct Project {
  std::string id;
  std::vector<ImageId> images;
};

/// Co-selection counts for one project. a(i, j) is the number of workers
/// who selected both images; a(i, i) the number who selected image i.
class AffinityMatrix {
 public:
  AffinityMatrix() = default;
  explicit AffinityMatrix(std::vector<ImageId> ids);

  std::size_t size() const { return ids_.size(); }
  const std::vector<ImageId>& ids() const { return ids_; }
  int at(std::size_t i, std::size_t j) const { return a_[i * ids_.size() + j]; }
  int& at(std::size_t i, std::size_t j) { return a_[i * ids_.size() + j]; }
  std::size_t workers() const { return workers_; }
  void set_workers(std::size_t w) { workers_ = w; }

 private:
  std::vector<ImageId> ids_;
  std::vector<int> a_;
  std::size_t workers_ = 0;
};

constexpr int kMinConsensus = 1;
constexpr int kMaxConsensus = 5;
constexpr std::size_t kDefaultWorkers = 5;

// Votes must all name `project.id` and select only its images (UsageError
// otherwise). Workers are counted by distinct worker id.
AffinityMatrix build_affinity(const Project& project, const std::vector<VoteRecord>& votes);
// Project images taken as the union of the selections, in ascending order.
AffinityMatrix build_affinity(const std::vector<VoteRecord>& votes);

// Connected components of the graph with edges a(i, j) >= level, i != j.
// Every image appears in exactly one part; singletons included. Parts are
// sorted internally and ordered by their smallest member.
std::vector<std::vector<ImageId>> partition(const AffinityMatrix& a, int level);

// Parts with at least two images.
std::vector<std::vector<ImageId>> style_groups(const std::vector<std::vector<ImageId>>& parts);

// Each worker starts from the largest true sub-group (the first on ties),
// then drops each member and adds each non-member with probability
// `flip_rate`, independently.
std::vector<VoteRecord> simulate_workers(const std::string& project_id,
                                         const std::vector<std::vector<ImageId>>& true_subgroups,
                                         std::size_t workers, double flip_rate, Rng& rng);

double jaccard(const std::vector<ImageId>& a, const std::vector<ImageId>& b);

struct ConsensusRow {
  int level = 0;
  std::size_t groups = 0;      // retained sub-groups (two or more images)
  std::size_t images = 0;      // images covered by retained sub-groups
  std::size_t singletons = 0;  // images left on their own
};

std::vector<ConsensusRow> consensus_stats(const std::vector<Project>& projects,
                                          const std::vector<VoteRecord>& votes);
std::string consensus_csv(const std::vector<ConsensusRow>& rows);

// Retained sub-groups over all projects at one level, in project order.
std::vector<std::vector<ImageId>> clean_groups(const std::vector<Project>& projects,
                                               const std::vector<VoteRecord>& votes, int level);

// One JSON object per line: {"project_id", "worker_id", "selected"}.
std::string votes_to_jsonl(const std::vector<VoteRecord>& votes);
std::vector<VoteRecord> votes_from_jsonl(const std::string& text);

}  // namespace aladin
