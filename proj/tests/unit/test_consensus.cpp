// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "aladin/consensus/clean_corpus.hpp"
#include "aladin/consensus/consensus.hpp"
#include "aladin/core/errors.hpp"

using namespace aladin;

namespace {

std::vector<VoteRecord> votes(const std::string& p,
                              const std::vector<std::vector<ImageId>>& selections) {
  std::vector<VoteRecord> out;
  for (std::size_t w = 0; w < selections.size(); ++w) {
    out.push_back({p, "w" + std::to_string(w), selections[w]});
  }
  return out;
}

// Workers 1-3 pick {a, b}, workers 4-5 pick {a, c}.
const Project kSplit{"p1", {1, 2, 3}};
std::vector<VoteRecord> split_votes() { return votes("p1", {{1, 2}, {1, 2}, {1, 2}, {1, 3}, {1, 3}}); }

bool is_partition_of(const std::vector<std::vector<ImageId>>& parts,
                     const std::vector<ImageId>& images) {
  std::multiset<ImageId> seen;
  for (const auto& p : parts) seen.insert(p.begin(), p.end());
  return seen == std::multiset<ImageId>(images.begin(), images.end());
}

}  // namespace

TEST(Affinity, UnanimousPair) {
  const auto a = build_affinity({"p", {7, 8}}, votes("p", {{7, 8}, {7, 8}, {7, 8}, {7, 8}, {7, 8}}));
  EXPECT_EQ(a.at(0, 1), 5);
  EXPECT_EQ(a.at(1, 0), 5);
  EXPECT_EQ(a.at(0, 0), 5);
  EXPECT_EQ(a.workers(), 5u);
}

TEST(Affinity, HandCountedCoSelections) {
  const auto a = build_affinity(kSplit, split_votes());
  EXPECT_EQ(a.at(0, 1), 3);
  EXPECT_EQ(a.at(0, 2), 2);
  EXPECT_EQ(a.at(1, 2), 0);
  EXPECT_EQ(a.at(0, 0), 5);
  EXPECT_EQ(a.at(2, 2), 2);
}

TEST(Affinity, NoSelectionsGiveZeroMatrix) {
  const auto a = build_affinity({"p", {1, 2, 3}}, votes("p", {{}, {}, {}}));
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(a.at(i, j), 0);
  }
  for (int c = 1; c <= 5; ++c) EXPECT_EQ(partition(a, c).size(), 3u);
}

TEST(Affinity, Errors) {
  auto mixed = split_votes();
  mixed.push_back({"other", "w9", {1}});
  EXPECT_THROW(build_affinity(kSplit, mixed), UsageError);
  EXPECT_THROW(build_affinity(mixed), UsageError);
  EXPECT_THROW(build_affinity(kSplit, votes("p1", {{1, 99}})), UsageError);
  EXPECT_THROW(partition(build_affinity(kSplit, split_votes()), 0), UsageError);
  EXPECT_THROW(partition(build_affinity(kSplit, split_votes()), 6), UsageError);
}

TEST(Affinity, OrderInvariantAndBounded) {
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    Project p{"p", {0, 1, 2, 3, 4, 5}};
    std::vector<std::vector<ImageId>> sel(5);
    for (auto& s : sel) {
      for (ImageId i : p.images) {
        if (rng.bernoulli(0.5)) s.push_back(i);
      }
    }
    auto v = votes("p", sel);
    const auto a = build_affinity(p, v);
    rng.shuffle(v);
    const auto b = build_affinity(p, v);
    for (std::size_t i = 0; i < 6; ++i) {
      for (std::size_t j = 0; j < 6; ++j) {
        ASSERT_EQ(a.at(i, j), b.at(i, j));
        ASSERT_EQ(a.at(i, j), a.at(j, i));
        ASSERT_LE(a.at(i, j), 5);
        ASSERT_GE(a.at(i, j), 0);
      }
    }
  }
}

TEST(Partition, ThresholdsIntoComponents) {
  const auto a = build_affinity(kSplit, split_votes());
  const auto c3 = partition(a, 3);
  ASSERT_EQ(c3.size(), 2u);
  EXPECT_EQ(c3[0], (std::vector<ImageId>{1, 2}));
  EXPECT_EQ(c3[1], (std::vector<ImageId>{3}));
  EXPECT_EQ(style_groups(c3).size(), 1u);
  EXPECT_EQ(partition(a, 1).size(), 1u);
  EXPECT_EQ(partition(a, 5).size(), 3u);
}

TEST(Partition, RefinementChainOnRandomMatrices) {
  Rng rng(2);
  for (int t = 0; t < 200; ++t) {
    Project p{"p", {}};
    const std::size_t n = 2 + rng.uniform_index(10);
    for (std::size_t i = 0; i < n; ++i) p.images.push_back(ImageId(i * 3));
    std::vector<std::vector<ImageId>> sel(5);
    const double density = rng.uniform(0.1, 0.9);
    for (auto& s : sel) {
      for (ImageId i : p.images) {
        if (rng.bernoulli(density)) s.push_back(i);
      }
    }
    const auto a = build_affinity(p, votes("p", sel));
    std::vector<std::vector<std::vector<ImageId>>> levels;
    for (int c = 1; c <= 5; ++c) {
      levels.push_back(partition(a, c));
      ASSERT_TRUE(is_partition_of(levels.back(), p.images));
    }
    for (int c = 0; c < 5; ++c) {
      for (int f = c + 1; f < 5; ++f) {
        ASSERT_GE(levels[f].size(), levels[c].size());
        for (const auto& fine : levels[f]) {
          int containing = 0;
          for (const auto& coarse : levels[c]) {
            const bool inside = std::all_of(fine.begin(), fine.end(), [&](ImageId x) {
              return std::find(coarse.begin(), coarse.end(), x) != coarse.end();
            });
            containing += inside ? 1 : 0;
          }
          ASSERT_EQ(containing, 1);
        }
      }
    }
  }
}

TEST(SimulateWorkers, FlipRateEndpoints) {
  const std::vector<std::vector<ImageId>> truth{{1, 2}, {3, 4, 5}, {6}};
  Rng rng(3);
  for (const auto& v : simulate_workers("p", truth, 5, 0.0, rng)) {
    EXPECT_EQ(v.selected, (std::vector<ImageId>{3, 4, 5}));
  }
  for (const auto& v : simulate_workers("p", truth, 5, 1.0, rng)) {
    EXPECT_EQ(v.selected, (std::vector<ImageId>{1, 2, 6}));
  }
  EXPECT_EQ(simulate_workers("p", truth, 4, 0.3, rng).size(), 4u);
  EXPECT_THROW(simulate_workers("p", truth, 5, 1.5, rng), UsageError);
}

TEST(SimulateWorkers, RecoversPlantedSubgroupAtLevelThree) {
  Rng rng(4);
  double total = 0;
  const int projects = 100;
  ImageId next = 0;
  for (int t = 0; t < projects; ++t) {
    std::vector<std::vector<ImageId>> truth;
    const std::size_t largest = 5 + rng.uniform_index(4);
    const std::size_t others = rng.uniform_index(3);
    for (std::size_t g = 0; g <= others; ++g) {
      const std::size_t size = g == 0 ? largest : 1 + rng.uniform_index(4);
      std::vector<ImageId> members;
      for (std::size_t k = 0; k < size; ++k) members.push_back(next++);
      truth.push_back(members);
    }
    const std::string pid = "p" + std::to_string(t);
    const auto v = simulate_workers(pid, truth, kDefaultWorkers, 0.1, rng);
    Project p{pid, {}};
    for (const auto& g : truth) p.images.insert(p.images.end(), g.begin(), g.end());
    double best = 0;
    for (const auto& part : partition(build_affinity(p, v), 3)) {
      best = std::max(best, jaccard(part, truth[0]));
    }
    total += best;
  }
  EXPECT_GE(total / projects, 0.9);
}

TEST(ConsensusStats, HandBuiltFixture) {
  const std::vector<Project> projects{kSplit, {"p2", {10, 11, 12, 13}}, {"p3", {20, 21}}};
  auto v = split_votes();
  for (const auto& x : votes("p2", std::vector<std::vector<ImageId>>(5, {10, 11, 12, 13}))) {
    v.push_back(x);
  }
  const auto rows = consensus_stats(projects, v);
  ASSERT_EQ(rows.size(), 5u);
  const std::size_t expect[5][3] = {{2, 7, 2}, {2, 7, 2}, {2, 6, 3}, {1, 4, 5}, {1, 4, 5}};
  for (int c = 0; c < 5; ++c) {
    EXPECT_EQ(rows[c].level, c + 1);
    EXPECT_EQ(rows[c].groups, expect[c][0]) << "level " << c + 1;
    EXPECT_EQ(rows[c].images, expect[c][1]) << "level " << c + 1;
    EXPECT_EQ(rows[c].singletons, expect[c][2]) << "level " << c + 1;
  }
  for (int c = 1; c < 5; ++c) {
    EXPECT_LE(rows[c].groups, rows[c - 1].groups);
    EXPECT_LE(rows[c].images, rows[c - 1].images);
  }
  EXPECT_EQ(consensus_csv(rows).substr(0, 33), "level,groups,images,singletons\n1,");
  EXPECT_EQ(clean_groups(projects, v, 3).size(), 2u);
}

TEST(ConsensusStats, ZeroVotesGiveNoGroups) {
  const auto rows = consensus_stats({{"a", {1, 2, 3}}, {"b", {4, 5}}}, {});
  for (const auto& r : rows) {
    EXPECT_EQ(r.groups, 0u);
    EXPECT_EQ(r.images, 0u);
    EXPECT_EQ(r.singletons, 5u);
  }
}

TEST(Votes, JsonLinesRoundTrip) {
  const auto v = split_votes();
  const std::string text = votes_to_jsonl(v);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
  const auto back = votes_from_jsonl(text);
  ASSERT_EQ(back.size(), v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    EXPECT_EQ(back[i].project_id, v[i].project_id);
    EXPECT_EQ(back[i].worker_id, v[i].worker_id);
    EXPECT_EQ(back[i].selected, v[i].selected);
  }
  EXPECT_THROW(votes_from_jsonl("{\"project_id\": 1}\n"), FormatError);
  EXPECT_THROW(votes_from_jsonl("not json\n"), FormatError);
}

TEST(CleanCorpus, PerfectWorkersYieldPureGroups) {
  DatagenConfig cfg;
  cfg.num_groups = 10;
  cfg.images_per_group = 6;
  cfg.size = 8;
  cfg.contamination = 0.3;
  const Corpus c = gen_dataset(cfg, 3);
  Rng rng(1);
  const CorpusCleaning r = clean_corpus(c, 3, kDefaultWorkers, 0.0, rng);
  EXPECT_EQ(r.projects.size(), 10u);
  EXPECT_EQ(r.votes.size(), 50u);
  ASSERT_FALSE(r.groups.empty());
  for (const auto& g : r.groups) {
    ASSERT_GE(g.size(), 2u);
    for (std::size_t i : g) EXPECT_EQ(c.records[i].style_id, c.records[g.front()].style_id);
  }
  EXPECT_THROW(clean_corpus(c, 0, 5, 0.1, rng), UsageError);
  EXPECT_THROW(clean_corpus(c, 3, 5, 2.0, rng), UsageError);
}

TEST(CleanCorpus, SameSeedSameVotes) {
  DatagenConfig cfg;
  cfg.num_groups = 6;
  cfg.size = 8;
  const Corpus c = gen_dataset(cfg, 4);
  Rng a(9), b(9);
  EXPECT_EQ(votes_to_jsonl(clean_corpus(c, 2, 5, 0.2, a).votes),
            votes_to_jsonl(clean_corpus(c, 2, 5, 0.2, b).votes));
}
