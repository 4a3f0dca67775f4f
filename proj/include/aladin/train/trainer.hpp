// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "aladin/accum/accumulate.hpp"
#include "aladin/core/rng.hpp"
#include "aladin/data/dataset.hpp"
#include "aladin/train/objective.hpp"
#include "aladin/train/optimizer.hpp"
#include "json.hpp"

namespace aladin {

struct FitConfig {
  std::size_t epochs = 10;
  // 0: as many batches as cover the images of eligible groups once.
  std::size_t steps_per_epoch = 0;
  std::size_t batch_groups = 8;  // N; a batch holds 2N images
  // Rows per accumulation chunk; 0 trains on the whole batch at once.
  std::size_t chunk_size = 0;
  AdamConfig adam;
  double lr_decay = 0.9;  // multiplicative, applied after every epoch
  // Epochs without a validation IR-1 improvement before stopping.
  std::size_t patience = 3;
  // Written on every validation improvement when non-empty.
  std::string checkpoint_path;

  void validate() const;
  nlohmann::json to_json() const;
  static FitConfig from_json(const nlohmann::json& j);
};

struct CurvePoint {
  std::size_t step = 0;
  std::size_t epoch = 0;
  StepStats stats;
  double val_ir1 = -1;  // negative when no validation ran after this step
};

struct FitResult {
  std::vector<CurvePoint> curve;
  std::size_t steps = 0;
  std::size_t epochs_run = 0;
  double best_val_ir1 = -1;
  std::size_t best_epoch = 0;
  bool early_stopped = false;
  std::size_t hard_negative_fallbacks = 0;
};

std::string curve_csv(const std::vector<CurvePoint>& curve);

struct FitInputs {
  const GroupedDataset* train = nullptr;
  // Enables per-epoch IR-1 evaluation, early stopping and best-model restore.
  const GroupedDataset* validation = nullptr;
  // Per-group semantic centroids of `train`, needed for hard negatives.
  const Tensor<float>* group_semantic = nullptr;
};

// IR-1 of the model's retrieval embedding over a grouped dataset.
template <class T>
double validation_ir1(TrainableModel<T>& model, const GroupedDataset& ds);

template <class T>
FitResult fit(TrainableModel<T>& model, Objective<T>& objective, const FitInputs& data,
              const FitConfig& cfg, Rng& rng,
              const std::function<void(const CurvePoint&)>& on_step = {});

}  // namespace aladin
