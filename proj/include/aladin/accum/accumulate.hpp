// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "aladin/model/trainable.hpp"
#include "aladin/train/objective.hpp"
#include "aladin/train/optimizer.hpp"
#include "aladin/train/sampling.hpp"

namespace aladin {

/// Splits a batch of `target_batch` rows into consecutive chunks of
/// `chunk_size` rows (the last may be shorter). Both sizes must be even so
/// that the pair rows 2i and 2i+1 always land in the same chunk.
struct AccumPlan {
  std::size_t target_batch = 0;
  std::size_t chunk_size = 0;
  std::vector<std::pair<std::size_t, std::size_t>> chunks;  // [begin, end)

  static AccumPlan make(std::size_t target_batch, std::size_t chunk_size);
  // Throws UsageError unless the plan covers exactly `batch_rows` rows.
  void check(std::size_t batch_rows) const;
};

// Phase 1: embeddings of every row, chunk by chunk, without recording.
template <class T>
Tensor<T> accumulate_forward(TrainableModel<T>& model, const GroupBatch<T>& batch,
                             const AccumPlan& plan, const ForwardRequest& request);

template <class T>
struct LogitGrads {
  double loss = 0;
  Tensor<T> cotangents;  // d(loss)/d(embeddings), same shape as the input
};

// Phase 2: the embedding loss over the full batch and its cotangents at the
// embeddings. Head parameters of the objective receive their gradients here.
template <class T>
LogitGrads<T> loss_and_logit_grads(Objective<T>& objective, const Tensor<T>& embeddings,
                                   const GroupBatch<T>& batch);

// Contrastive loss at temperature `tau` and its cotangents.
template <class T>
LogitGrads<T> loss_and_logit_grads(const Tensor<T>& embeddings, const std::vector<int>& group_ids,
                                   double tau);

// Phase 3: re-forwards each chunk with recording and injects its cotangent
// rows; the reconstruction term is added per chunk with weight
// `rec_weight`. Parameter grads accumulate across chunks. Returns the
// per-image reconstruction losses (empty when rec_weight is 0).
template <class T>
std::vector<double> reforward_apply(TrainableModel<T>& model, const GroupBatch<T>& batch,
                                    const AccumPlan& plan, const Tensor<T>& cotangents,
                                    const ForwardRequest& request, double rec_weight);

// All three phases, leaving full-batch gradients in the parameters.
template <class T>
StepStats accumulated_gradients(TrainableModel<T>& model, Objective<T>& objective,
                                const GroupBatch<T>& batch, const AccumPlan& plan);

// accumulated_gradients() followed by one optimizer update.
template <class T>
StepStats big_batch_step(TrainableModel<T>& model, Objective<T>& objective,
                         const GroupBatch<T>& batch, const AccumPlan& plan, Adam<T>& optimizer);

// Reference path: one recorded graph over the whole batch, then an update.
template <class T>
StepStats monolithic_step(TrainableModel<T>& model, Objective<T>& objective,
                          const GroupBatch<T>& batch, Adam<T>& optimizer);

}  // namespace aladin
