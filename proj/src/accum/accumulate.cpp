// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#include "aladin/accum/accumulate.hpp"

#include <algorithm>
#include <string>

#include "aladin/core/errors.hpp"

namespace aladin {

AccumPlan AccumPlan::make(std::size_t target_batch, std::size_t chunk_size) {
  if (target_batch == 0 || target_batch % 2) {
    throw UsageError("AccumPlan: target batch must be a positive even row count, got " +
                     std::to_string(target_batch));
  }
  if (chunk_size == 0 || chunk_size % 2) {
    throw UsageError("AccumPlan: chunk size " + std::to_string(chunk_size) +
                     " would split a positive pair; it must be even");
  }
  if (chunk_size > target_batch) {
    throw UsageError("AccumPlan: chunk size exceeds the target batch");
  }
  AccumPlan p;
  p.target_batch = target_batch;
  p.chunk_size = chunk_size;
  for (std::size_t b = 0; b < target_batch; b += chunk_size) {
    p.chunks.emplace_back(b, std::min(target_batch, b + chunk_size));
  }
  return p;
}

void AccumPlan::check(std::size_t batch_rows) const {
  if (batch_rows != target_batch) {
    throw UsageError("AccumPlan covers " + std::to_string(target_batch) + " rows, batch has " +
                     std::to_string(batch_rows));
  }
  std::size_t next = 0;
  for (const auto& [b, e] : chunks) {
    if (b != next || e <= b || b % 2 || e % 2) throw UsageError("AccumPlan: malformed chunks");
    next = e;
  }
  if (next != target_batch) throw UsageError("AccumPlan: chunks do not cover the batch");
}

namespace {

template <class T>
void require_deterministic(const TrainableModel<T>& model) {
  if (!model.deterministic_forward()) {
    throw UsageError("logit accumulation needs a model with a deterministic forward (" +
                     model.kind() + " is not)");
  }
}

}  // namespace

template <class T>
Tensor<T> accumulate_forward(TrainableModel<T>& model, const GroupBatch<T>& batch,
                             const AccumPlan& plan, const ForwardRequest& request) {
  require_deterministic(model);
  plan.check(batch.size());
  ForwardRequest req = request;
  req.embedding = true;
  req.reconstruction = false;
  std::vector<Tensor<T>> parts;
  parts.reserve(plan.chunks.size());
  for (const auto& [b, e] : plan.chunks) {
    GradContext<T> ctx(GradContext<T>::Mode::NoGrad);
    auto out = model.forward(ctx.constant(slice_rows(batch.images, b, e)), req);
    parts.push_back(out.embedding.value());
  }
  return concat_rows<T>(parts);
}

template <class T>
LogitGrads<T> loss_and_logit_grads(Objective<T>& objective, const Tensor<T>& embeddings,
                                   const GroupBatch<T>& batch) {
  GradContext<T> ctx;
  auto e = ctx.input(embeddings);
  ctx.watch(e);
  auto loss = objective.embedding_loss(e, batch);
  LogitGrads<T> out;
  out.loss = double(loss.value()[0]);
  auto g = objective.has_head() ? ctx.backward_and_collect(loss, {e}) : ctx.grads_at(loss, {e});
  out.cotangents = std::move(g[0]);
  return out;
}

template <class T>
LogitGrads<T> loss_and_logit_grads(const Tensor<T>& embeddings, const std::vector<int>& group_ids,
                                   double tau) {
  GradContext<T> ctx;
  auto e = ctx.input(embeddings);
  ctx.watch(e);
  auto loss = contrastive_loss(e, group_ids, tau);
  LogitGrads<T> out;
  out.loss = double(loss.value()[0]);
  out.cotangents = std::move(ctx.grads_at(loss, {e})[0]);
  return out;
}

template <class T>
std::vector<double> reforward_apply(TrainableModel<T>& model, const GroupBatch<T>& batch,
                                    const AccumPlan& plan, const Tensor<T>& cotangents,
                                    const ForwardRequest& request, double rec_weight) {
  require_deterministic(model);
  plan.check(batch.size());
  ForwardRequest req = request;
  req.reconstruction = rec_weight > 0;
  if (req.embedding && (cotangents.rank() != 2 || cotangents.dim(0) != batch.size())) {
    throw DimensionError("reforward_apply: cotangents must be [" + std::to_string(batch.size()) +
                         ", d], got " + shape_string(cotangents.shape()));
  }
  std::vector<double> rec;
  for (const auto& [b, e] : plan.chunks) {
    GradContext<T> ctx;
    auto images = ctx.constant(slice_rows(batch.images, b, e));
    auto out = model.forward(images, req);
    std::vector<Seed<T>> seeds;
    if (req.embedding) seeds.push_back({out.embedding, slice_rows(cotangents, b, e)});
    if (req.reconstruction) {
      for (double r : per_image_l1(out.reconstruction.value(), images.value())) rec.push_back(r);
      auto r = reconstruction_loss(out.reconstruction, images);
      seeds.push_back({r, Tensor<T>(r.shape(), static_cast<T>(rec_weight))});
    }
    ctx.inject_and_backward(std::move(seeds));
  }
  return rec;
}

template <class T>
StepStats accumulated_gradients(TrainableModel<T>& model, Objective<T>& objective,
                                const GroupBatch<T>& batch, const AccumPlan& plan) {
  model.parameters().zero_grad();
  objective.head().zero_grad();
  const ForwardRequest req = objective.request(model);
  const double w = objective.reconstruction_weight(model);
  LogitGrads<T> lg;
  if (req.embedding) {
    lg = loss_and_logit_grads(objective, accumulate_forward(model, batch, plan, req), batch);
  }
  auto rec = reforward_apply(model, batch, plan, lg.cotangents, req, w);
  return objective.combine(lg.loss, rec, w);
}

template <class T>
StepStats big_batch_step(TrainableModel<T>& model, Objective<T>& objective,
                         const GroupBatch<T>& batch, const AccumPlan& plan, Adam<T>& optimizer) {
  StepStats s = accumulated_gradients(model, objective, batch, plan);
  optimizer.step(trainable_parameters(model, objective));
  return s;
}

template <class T>
StepStats monolithic_step(TrainableModel<T>& model, Objective<T>& objective,
                          const GroupBatch<T>& batch, Adam<T>& optimizer) {
  StepStats s = monolithic_gradients(model, objective, batch);
  optimizer.step(trainable_parameters(model, objective));
  return s;
}

#define ALADIN_INSTANTIATE(T)                                                                  \
  template Tensor<T> accumulate_forward(TrainableModel<T>&, const GroupBatch<T>&,              \
                                        const AccumPlan&, const ForwardRequest&);              \
  template LogitGrads<T> loss_and_logit_grads(Objective<T>&, const Tensor<T>&,                 \
                                              const GroupBatch<T>&);                           \
  template LogitGrads<T> loss_and_logit_grads(const Tensor<T>&, const std::vector<int>&,       \
                                              double);                                         \
  template std::vector<double> reforward_apply(TrainableModel<T>&, const GroupBatch<T>&,       \
                                               const AccumPlan&, const Tensor<T>&,             \
                                               const ForwardRequest&, double);                 \
  template StepStats accumulated_gradients(TrainableModel<T>&, Objective<T>&,                  \
                                           const GroupBatch<T>&, const AccumPlan&);            \
  template StepStats big_batch_step(TrainableModel<T>&, Objective<T>&, const GroupBatch<T>&,   \
                                    const AccumPlan&, Adam<T>&);                               \
  template StepStats monolithic_step(TrainableModel<T>&, Objective<T>&, const GroupBatch<T>&, \
                                     Adam<T>&);

ALADIN_INSTANTIATE(float)
ALADIN_INSTANTIATE(double)

}  // namespace aladin
