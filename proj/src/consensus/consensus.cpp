// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#include "aladin/consensus/consensus.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "aladin/core/errors.hpp"
#include "json.hpp"

namespace aladin {

AffinityMatrix::AffinityMatrix(std::vector<ImageId> ids)
    : ids_(std::move(ids)), a_(ids_.size() * ids_.size(), 0) {}

namespace {

void check_level(int level) {
  if (level < kMinConsensus || level > kMaxConsensus) {
    throw UsageError("consensus level must be in [1, 5], got " + std::to_string(level));
  }
}

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

AffinityMatrix build_affinity(const Project& project, const std::vector<VoteRecord>& votes) {
  AffinityMatrix a(project.images);
  std::unordered_map<ImageId, std::size_t> pos;
  for (std::size_t i = 0; i < project.images.size(); ++i) {
    if (!pos.emplace(project.images[i], i).second) {
      throw UsageError("project " + project.id + " lists an image twice");
    }
  }
  std::set<std::string> workers;
  for (const auto& v : votes) {
    if (v.project_id != project.id) {
      throw UsageError("build_affinity: vote for project '" + v.project_id + "' mixed into '" +
                       project.id + "'");
    }
    workers.insert(v.worker_id);
    std::vector<std::size_t> sel;
    for (ImageId id : v.selected) {
      auto it = pos.find(id);
      if (it == pos.end()) {
        throw UsageError("build_affinity: image " + std::to_string(id) + " is not in project " +
                         project.id);
      }
      sel.push_back(it->second);
    }
    std::sort(sel.begin(), sel.end());
    sel.erase(std::unique(sel.begin(), sel.end()), sel.end());
    for (std::size_t x : sel) {
      for (std::size_t y : sel) ++a.at(x, y);
    }
  }
  if (workers.size() != votes.size()) {
    throw UsageError("build_affinity: a worker voted twice on project " + project.id);
  }
  a.set_workers(workers.size());
  return a;
}

AffinityMatrix build_affinity(const std::vector<VoteRecord>& votes) {
  Project p;
  std::set<ImageId> ids;
  for (const auto& v : votes) ids.insert(v.selected.begin(), v.selected.end());
  p.id = votes.empty() ? std::string() : votes.front().project_id;
  p.images.assign(ids.begin(), ids.end());
  return build_affinity(p, votes);
}

std::vector<std::vector<ImageId>> partition(const AffinityMatrix& a, int level) {
  check_level(level);
  const std::size_t n = a.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (a.at(i, j) >= level) parent[find_root(parent, i)] = find_root(parent, j);
    }
  }
  std::map<std::size_t, std::vector<ImageId>> by_root;
  for (std::size_t i = 0; i < n; ++i) by_root[find_root(parent, i)].push_back(a.ids()[i]);
  std::vector<std::vector<ImageId>> parts;
  for (auto& [root, members] : by_root) {
    std::sort(members.begin(), members.end());
    parts.push_back(std::move(members));
  }
  std::sort(parts.begin(), parts.end(),
            [](const auto& x, const auto& y) { return x.front() < y.front(); });
  return parts;
}

std::vector<std::vector<ImageId>> style_groups(const std::vector<std::vector<ImageId>>& parts) {
  std::vector<std::vector<ImageId>> out;
  for (const auto& p : parts) {
    if (p.size() >= 2) out.push_back(p);
  }
  return out;
}

std::vector<VoteRecord> simulate_workers(const std::string& project_id,
                                         const std::vector<std::vector<ImageId>>& true_subgroups,
                                         std::size_t workers, double flip_rate, Rng& rng) {
  if (!(flip_rate >= 0 && flip_rate <= 1)) throw UsageError("flip_rate must be in [0, 1]");
  if (true_subgroups.empty()) throw UsageError("simulate_workers: project has no images");
  std::vector<ImageId> images;
  std::size_t largest = 0;
  for (std::size_t g = 0; g < true_subgroups.size(); ++g) {
    images.insert(images.end(), true_subgroups[g].begin(), true_subgroups[g].end());
    if (true_subgroups[g].size() > true_subgroups[largest].size()) largest = g;
  }
  const std::set<ImageId> target(true_subgroups[largest].begin(), true_subgroups[largest].end());
  std::vector<VoteRecord> votes;
  for (std::size_t w = 0; w < workers; ++w) {
    VoteRecord v{project_id, "w" + std::to_string(w), {}};
    for (ImageId id : images) {
      const bool member = target.count(id) > 0;
      if (member != rng.bernoulli(flip_rate)) v.selected.push_back(id);
    }
    votes.push_back(std::move(v));
  }
  return votes;
}

double jaccard(const std::vector<ImageId>& a, const std::vector<ImageId>& b) {
  const std::set<ImageId> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::size_t inter = 0;
  for (ImageId x : sa) inter += sb.count(x);
  const std::size_t uni = sa.size() + sb.size() - inter;
  return uni ? double(inter) / double(uni) : 1.0;
}

namespace {

std::map<std::string, std::vector<VoteRecord>> votes_by_project(
    const std::vector<Project>& projects, const std::vector<VoteRecord>& votes) {
  std::map<std::string, std::vector<VoteRecord>> out;
  for (const auto& p : projects) out[p.id];
  for (const auto& v : votes) {
    auto it = out.find(v.project_id);
    if (it == out.end()) throw UsageError("vote for unknown project '" + v.project_id + "'");
    it->second.push_back(v);
  }
  return out;
}

}  // namespace

std::vector<ConsensusRow> consensus_stats(const std::vector<Project>& projects,
                                          const std::vector<VoteRecord>& votes) {
  auto grouped = votes_by_project(projects, votes);
  std::vector<ConsensusRow> rows;
  for (int level = kMinConsensus; level <= kMaxConsensus; ++level) rows.push_back({level});
  for (const auto& p : projects) {
    const AffinityMatrix a = build_affinity(p, grouped[p.id]);
    for (auto& row : rows) {
      for (const auto& part : partition(a, row.level)) {
        if (part.size() >= 2) {
          ++row.groups;
          row.images += part.size();
        } else {
          ++row.singletons;
        }
      }
    }
  }
  return rows;
}

std::string consensus_csv(const std::vector<ConsensusRow>& rows) {
  std::string out = "level,groups,images,singletons\n";
  for (const auto& r : rows) {
    out += std::to_string(r.level) + "," + std::to_string(r.groups) + "," +
           std::to_string(r.images) + "," + std::to_string(r.singletons) + "\n";
  }
  return out;
}

std::vector<std::vector<ImageId>> clean_groups(const std::vector<Project>& projects,
                                               const std::vector<VoteRecord>& votes, int level) {
  check_level(level);
  auto grouped = votes_by_project(projects, votes);
  std::vector<std::vector<ImageId>> out;
  for (const auto& p : projects) {
    for (auto& g : style_groups(partition(build_affinity(p, grouped[p.id]), level))) {
      out.push_back(std::move(g));
    }
  }
  return out;
}

std::string votes_to_jsonl(const std::vector<VoteRecord>& votes) {
  std::string out;
  for (const auto& v : votes) {
    nlohmann::json j{{"project_id", v.project_id},
                     {"worker_id", v.worker_id},
                     {"selected", v.selected}};
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<VoteRecord> votes_from_jsonl(const std::string& text) {
  std::vector<VoteRecord> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      out.push_back({j.at("project_id").get<std::string>(), j.at("worker_id").get<std::string>(),
                     j.at("selected").get<std::vector<ImageId>>()});
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("votes line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace aladin
