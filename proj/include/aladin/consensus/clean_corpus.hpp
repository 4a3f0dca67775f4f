// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "aladin/consensus/consensus.hpp"
#include "aladin/core/rng.hpp"
#include "aladin/datagen/corpus.hpp"

namespace aladin {

struct CorpusCleaning {
  std::vector<Project> projects;  // one per raw group, ids "raw<g>"
  std::vector<VoteRecord> votes;
  std::vector<std::vector<std::size_t>> groups;  // retained sub-groups, corpus indices
};

// Simulated annotation of every raw group. Workers know each image's true
// style and vote for the project's dominant one.
CorpusCleaning clean_corpus(const Corpus& corpus, int level, std::size_t workers, double flip_rate,
                            Rng& rng);

}  // namespace aladin
