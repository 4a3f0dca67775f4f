// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <vector>

#include "aladin/core/rng.hpp"
#include "aladin/data/dataset.hpp"
#include "aladin/datagen/style.hpp"
#include "json.hpp"

namespace aladin {

struct DatagenConfig {
  std::size_t num_groups = 200;
  std::size_t images_per_group = 8;
  std::size_t size = 64;
  // Probability that a raw-group slot holds an image of another style.
  double contamination = 0.15;
  double test_fraction = 0.2;
  // Groups per style family. Styles within a family start from one base
  // and differ from it in `family_mutations` fields, which makes them
  // fine-grained neighbours. 1 draws every style independently.
  std::size_t family_size = 1;
  std::size_t family_mutations = 2;

  void validate() const;
  nlohmann::json to_json() const;
  static DatagenConfig from_json(const nlohmann::json& j);
};

enum class Split { Train, Test, All };
std::string split_name(Split s);

struct ImageRecord {
  std::string file;
  int style_id = -1;  // index into Corpus::styles
  int semantic = -1;  // primary shape
  int raw_group = -1;
  int cleaned_group = -1;
  Split split = Split::Train;
  ContentParams content;
};

/// A generated corpus. Cleaned group g holds the images rendered in style g;
/// raw group g is the same list with some slots swapped for images in other
/// styles. Swapped-out images stay in their cleaned group only.
struct Corpus {
  DatagenConfig config;
  std::uint64_t seed = 0;
  std::vector<StyleParams> styles;
  std::vector<Split> group_split;
  std::vector<ImageRecord> records;
  Tensor<float> images;  // [M, 3, S, S], multiples of 1/255
  // Further groupings keyed by name (e.g. consensus cleaning output), with a
  // free-form tag object each.
  std::map<std::string, std::vector<std::vector<std::size_t>>> partitions;
  std::map<std::string, nlohmann::json> partition_tags;

  std::size_t num_images() const { return records.size(); }
  std::vector<std::vector<std::size_t>> groups(const std::string& partition) const;
};

// Rounds to the 8-bit grid so PNG storage is lossless.
void quantize_u8(Tensor<float>& images);

Corpus gen_dataset(const DatagenConfig& cfg, std::uint64_t seed);

// Per raw group: fraction of its images rendered in the group's own style.
std::vector<double> raw_group_purity(const Corpus& corpus);

/// A slice of the corpus ready for training or evaluation.
struct DatasetView {
  GroupedDataset data;
  std::vector<std::size_t> corpus_index;  // view image -> corpus record
  std::vector<int> style;                 // style id per view image
  std::vector<int> group;                 // view group per image
};

// Images of `split` that belong to a group of `partition` ("raw",
// "cleaned" or a named one). Groups with a single image there are kept but
// never yield training pairs.
DatasetView make_view(const Corpus& corpus, const std::string& partition, Split split);

}  // namespace aladin
