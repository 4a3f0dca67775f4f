// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "aladin/autodiff/graph.hpp"
#include "aladin/model/trainable.hpp"
#include "aladin/train/losses.hpp"
#include "aladin/train/sampling.hpp"

namespace aladin {

struct StepStats {
  double loss = 0;            // embedding + lambda * reconstruction
  double embedding = 0;       // contrastive / triplet / listwise / softmax term
  double reconstruction = 0;  // sum of per-image L1 means
};

/// The training objective: an embedding loss selected by LossConfig::kind,
/// plus lambda times the reconstruction loss when the model decodes.
///
/// The softmax kind owns a linear classifier head over `num_classes` groups.
/// It is created on first use, once the embedding width is known.
template <class T>
class Objective {
 public:
  explicit Objective(LossConfig cfg, std::size_t num_classes = 0, std::uint64_t head_seed = 0);

  const LossConfig& config() const { return cfg_; }

  bool needs_embedding() const { return cfg_.kind != LossKind::ReconstructionOnly; }
  // Weight of the reconstruction term for this model; 0 when it is absent.
  double reconstruction_weight(const TrainableModel<T>& model) const;
  ForwardRequest request(const TrainableModel<T>& model) const;

  // Embedding term over a whole batch. `embeddings` rows follow batch order.
  Var<T> embedding_loss(const Var<T>& embeddings, const GroupBatch<T>& batch);

  // Same reduction used by every training path, so reported losses agree
  // bit for bit.
  StepStats combine(double embedding, const std::vector<double>& per_image_rec,
                    double weight) const;

  bool has_head() const { return head_.size() > 0; }
  ParameterSet<T>& head() { return head_; }

 private:
  LossConfig cfg_;
  std::size_t num_classes_;
  std::uint64_t head_seed_;
  ParameterSet<T> head_;
};

// Every trainable parameter: the model's, then the objective's head.
template <class T>
std::vector<Parameter<T>*> trainable_parameters(TrainableModel<T>& model, Objective<T>& objective);

// Full-batch loss and gradients in one recorded graph. Parameter grads are
// reset first and left accumulated; no update is applied.
template <class T>
StepStats monolithic_gradients(TrainableModel<T>& model, Objective<T>& objective,
                               const GroupBatch<T>& batch);

}  // namespace aladin
