// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#include "aladin/consensus/clean_corpus.hpp"

#include <algorithm>

#include "aladin/core/errors.hpp"

namespace aladin {

CorpusCleaning clean_corpus(const Corpus& corpus, int level, std::size_t workers, double flip_rate,
                            Rng& rng) {
  if (level < kMinConsensus || level > kMaxConsensus) {
    throw UsageError("consensus level must be in [1, 5]");
  }
  if (!(flip_rate >= 0 && flip_rate <= 1)) throw UsageError("flip rate must be in [0, 1]");
  CorpusCleaning out;
  const auto raw = corpus.groups("raw");
  for (std::size_t g = 0; g < raw.size(); ++g) {
    Project p{"raw" + std::to_string(g), {}};
    std::vector<int> styles;
    std::vector<std::vector<ImageId>> truth;
    for (std::size_t i : raw[g]) {
      p.images.push_back(static_cast<ImageId>(i));
      const int s = corpus.records[i].style_id;
      auto it = std::find(styles.begin(), styles.end(), s);
      if (it == styles.end()) {
        styles.push_back(s);
        truth.emplace_back();
        it = styles.end() - 1;
      }
      truth[std::size_t(it - styles.begin())].push_back(static_cast<ImageId>(i));
    }
    auto v = simulate_workers(p.id, truth, workers, flip_rate, rng);
    out.votes.insert(out.votes.end(), v.begin(), v.end());
    out.projects.push_back(std::move(p));
  }
  for (const auto& part : clean_groups(out.projects, out.votes, level)) {
    out.groups.emplace_back(part.begin(), part.end());
  }
  return out;
}

}  // namespace aladin
