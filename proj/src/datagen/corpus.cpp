// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#include "aladin/datagen/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "aladin/core/errors.hpp"

namespace aladin {

void DatagenConfig::validate() const {
  if (num_groups < 2) throw UsageError("datagen: need at least two groups");
  if (images_per_group < 2) throw UsageError("datagen: need at least two images per group");
  if (size < 8) throw UsageError("datagen: image size must be >= 8");
  if (!(contamination >= 0 && contamination <= 1)) throw UsageError("contamination must be in [0, 1]");
  if (!(test_fraction >= 0 && test_fraction < 1)) throw UsageError("test_fraction must be in [0, 1)");
  if (family_size == 0) throw UsageError("family_size must be >= 1");
  if (family_mutations < 2 || family_mutations > 6) {
    throw UsageError("family_mutations must be in [2, 6]");
  }
}

nlohmann::json DatagenConfig::to_json() const {
  return {{"num_groups", num_groups},       {"images_per_group", images_per_group},
          {"size", size},                   {"contamination", contamination},
          {"test_fraction", test_fraction}, {"family_size", family_size},
          {"family_mutations", family_mutations}};
}

DatagenConfig DatagenConfig::from_json(const nlohmann::json& j) {
  DatagenConfig c;
  c.num_groups = j.value("num_groups", c.num_groups);
  c.images_per_group = j.value("images_per_group", c.images_per_group);
  c.size = j.value("size", c.size);
  c.contamination = j.value("contamination", c.contamination);
  c.test_fraction = j.value("test_fraction", c.test_fraction);
  c.family_size = j.value("family_size", c.family_size);
  c.family_mutations = j.value("family_mutations", c.family_mutations);
  c.validate();
  return c;
}

std::string split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Test: return "test";
    case Split::All: return "all";
  }
  return "?";
}

std::vector<std::vector<std::size_t>> Corpus::groups(const std::string& partition) const {
  if (partition == "raw" || partition == "cleaned") {
    const bool raw = partition == "raw";
    std::vector<std::vector<std::size_t>> out(styles.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
      const int g = raw ? records[i].raw_group : records[i].cleaned_group;
      if (g >= 0) out[std::size_t(g)].push_back(i);
    }
    return out;
  }
  auto it = partitions.find(partition);
  if (it == partitions.end()) throw UsageError("unknown partition '" + partition + "'");
  return it->second;
}

void quantize_u8(Tensor<float>& images) {
  for (auto& v : images.data()) v = std::round(std::clamp(v, 0.0f, 1.0f) * 255.0f) / 255.0f;
}

Corpus gen_dataset(const DatagenConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Corpus c;
  c.config = cfg;
  c.seed = seed;
  Rng root(seed);
  Rng style_rng = root.fork(), split_rng = root.fork(), content_rng = root.fork(),
      contam_rng = root.fork();

  StyleSampler sampler;
  StyleParams base;
  for (std::size_t g = 0; g < cfg.num_groups; ++g) {
    if (g % cfg.family_size == 0) {
      base = sampler.draw(style_rng);
      c.styles.push_back(base);
    } else {
      c.styles.push_back(sampler.draw_near(base, cfg.family_mutations, style_rng));
    }
  }

  // Group-level split: no test style is seen in training.
  std::vector<std::size_t> order(cfg.num_groups);
  for (std::size_t g = 0; g < order.size(); ++g) order[g] = g;
  split_rng.shuffle(order);
  const auto n_test = static_cast<std::size_t>(std::round(cfg.test_fraction * cfg.num_groups));
  c.group_split.assign(cfg.num_groups, Split::Train);
  for (std::size_t k = 0; k < n_test; ++k) c.group_split[order[k]] = Split::Test;

  std::vector<std::vector<std::size_t>> same_split(2);
  for (std::size_t g = 0; g < cfg.num_groups; ++g) {
    same_split[c.group_split[g] == Split::Test].push_back(g);
  }

  std::vector<Tensor<float>> imgs;
  auto add = [&](int style, int raw, int cleaned, Split split) {
    ImageRecord r;
    r.content = gen_content(content_rng);
    r.style_id = style;
    r.semantic = static_cast<int>(r.content.shape_set.front());
    r.raw_group = raw;
    r.cleaned_group = cleaned;
    r.split = split;
    char name[32];
    std::snprintf(name, sizeof name, "images/%05zu.png", c.records.size());
    r.file = name;
    imgs.push_back(render(r.content, c.styles[std::size_t(style)], cfg.size));
    c.records.push_back(std::move(r));
  };

  for (std::size_t g = 0; g < cfg.num_groups; ++g) {
    const int gi = static_cast<int>(g);
    const Split split = c.group_split[g];
    const auto& pool = same_split[split == Split::Test].size() > 1
                           ? same_split[split == Split::Test]
                           : order;
    std::vector<int> intruders;
    for (std::size_t k = 0; k < cfg.images_per_group; ++k) {
      const bool swapped = contam_rng.bernoulli(cfg.contamination);
      add(gi, swapped ? -1 : gi, gi, split);
      if (!swapped) continue;
      std::size_t other = g;
      while (other == g) other = pool[contam_rng.uniform_index(pool.size())];
      intruders.push_back(static_cast<int>(other));
    }
    for (int s : intruders) add(s, gi, -1, split);
  }
  c.images = stack<float>(imgs);
  quantize_u8(c.images);
  return c;
}

std::vector<double> raw_group_purity(const Corpus& corpus) {
  std::vector<double> own(corpus.styles.size(), 0), total(corpus.styles.size(), 0);
  for (const auto& r : corpus.records) {
    if (r.raw_group < 0) continue;
    total[std::size_t(r.raw_group)] += 1;
    own[std::size_t(r.raw_group)] += r.style_id == r.raw_group ? 1 : 0;
  }
  std::vector<double> out;
  for (std::size_t g = 0; g < own.size(); ++g) out.push_back(total[g] ? own[g] / total[g] : 0.0);
  return out;
}

DatasetView make_view(const Corpus& corpus, const std::string& partition, Split split) {
  const auto groups = corpus.groups(partition);
  DatasetView v;
  std::vector<std::size_t> g_of(corpus.num_images(), SIZE_MAX);
  std::vector<std::vector<std::size_t>> kept;
  for (const auto& members : groups) {
    std::vector<std::size_t> m;
    for (std::size_t i : members) {
      if (i >= corpus.num_images()) throw DataError("partition references a missing image");
      if (split == Split::All || corpus.records[i].split == split) m.push_back(i);
    }
    if (!m.empty()) kept.push_back(std::move(m));
  }
  std::vector<Tensor<float>> imgs;
  for (std::size_t g = 0; g < kept.size(); ++g) {
    std::vector<std::size_t> local;
    for (std::size_t i : kept[g]) {
      if (g_of[i] != SIZE_MAX) throw DataError("partition '" + partition + "' overlaps itself");
      g_of[i] = g;
      local.push_back(v.corpus_index.size());
      v.corpus_index.push_back(i);
      v.style.push_back(corpus.records[i].style_id);
      v.group.push_back(static_cast<int>(g));
      v.data.semantic.push_back(corpus.records[i].semantic);
      imgs.push_back(row(corpus.images, i));
    }
    v.data.groups.push_back(std::move(local));
  }
  if (!imgs.empty()) v.data.images = stack<float>(imgs);
  return v;
}

}  // namespace aladin
