// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#include "aladin/train/objective.hpp"

#include "aladin/autodiff/ops.hpp"
#include "aladin/core/errors.hpp"
#include "aladin/model/aladin_model.hpp"

namespace aladin {

template <class T>
Objective<T>::Objective(LossConfig cfg, std::size_t num_classes, std::uint64_t head_seed)
    : cfg_(cfg), num_classes_(num_classes), head_seed_(head_seed) {
  cfg_.validate();
  if (cfg_.kind == LossKind::Softmax && num_classes_ < 2) {
    throw UsageError("softmax objective needs the number of groups (>= 2)");
  }
}

template <class T>
double Objective<T>::reconstruction_weight(const TrainableModel<T>& model) const {
  if (!model.supports_reconstruction()) {
    if (cfg_.kind == LossKind::ReconstructionOnly) {
      throw UsageError("reconstruction-only training needs a model with a decoder");
    }
    return 0.0;
  }
  return cfg_.kind == LossKind::ReconstructionOnly ? 1.0 : cfg_.lambda_rec;
}

template <class T>
ForwardRequest Objective<T>::request(const TrainableModel<T>& model) const {
  ForwardRequest r;
  r.embedding = needs_embedding();
  r.reconstruction = reconstruction_weight(model) > 0;
  r.use_projection = cfg_.use_projection;
  return r;
}

template <class T>
Var<T> Objective<T>::embedding_loss(const Var<T>& embeddings, const GroupBatch<T>& batch) {
  if (embeddings.dim(0) != batch.size()) {
    throw DimensionError("embedding_loss: one embedding row per batch row");
  }
  switch (cfg_.kind) {
    case LossKind::Contrastive:
      return contrastive_loss(embeddings, batch.group_ids, cfg_.tau, cfg_.form);
    case LossKind::Triplet: {
      if (batch.negatives.size() != batch.size()) {
        throw UsageError("triplet loss needs a negative assigned to every row");
      }
      // Row 2i anchors against its pair 2i+1 and vice versa.
      std::vector<std::size_t> pos(batch.size());
      for (std::size_t r = 0; r < batch.size(); ++r) pos[r] = r ^ 1u;
      return triplet_loss(embeddings, gather_rows(embeddings, pos),
                          gather_rows(embeddings, batch.negatives), cfg_.margin);
    }
    case LossKind::Listwise:
      return batch_listwise_loss(embeddings, batch.group_ids, cfg_.listwise_temperature);
    case LossKind::Softmax: {
      const std::size_t d = embeddings.dim(1);
      if (!has_head()) {
        Rng rng(head_seed_);
        head_.add("softmax.weight", init_weight<T>({num_classes_, d}, d, 0.0, rng));
      }
      std::vector<std::size_t> labels;
      for (int g : batch.group_ids) {
        if (g < 0 || std::size_t(g) >= num_classes_) {
          throw UsageError("softmax objective: group id " + std::to_string(g) + " out of range");
        }
        labels.push_back(std::size_t(g));
      }
      auto* ctx = embeddings.context();
      return softmax_group_loss(linear(embeddings, ctx->param(head_.get("softmax.weight"))),
                                labels);
    }
    case LossKind::ReconstructionOnly:
      break;
  }
  throw UsageError("embedding_loss: objective has no embedding term");
}

template <class T>
StepStats Objective<T>::combine(double embedding, const std::vector<double>& per_image_rec,
                                double weight) const {
  StepStats s;
  s.embedding = embedding;
  for (double r : per_image_rec) s.reconstruction += r;
  s.loss = embedding + weight * s.reconstruction;
  return s;
}

template <class T>
std::vector<Parameter<T>*> trainable_parameters(TrainableModel<T>& model, Objective<T>& objective) {
  auto out = model.parameters().pointers();
  for (auto* p : objective.head().pointers()) out.push_back(p);
  return out;
}

template <class T>
StepStats monolithic_gradients(TrainableModel<T>& model, Objective<T>& objective,
                               const GroupBatch<T>& batch) {
  model.parameters().zero_grad();
  objective.head().zero_grad();
  const double w = objective.reconstruction_weight(model);
  const ForwardRequest req = objective.request(model);
  GradContext<T> ctx;
  auto images = ctx.constant(batch.images);
  auto out = model.forward(images, req);

  Var<T> total;
  double emb = 0;
  if (req.embedding) {
    total = objective.embedding_loss(out.embedding, batch);
    emb = double(total.value()[0]);
  }
  std::vector<double> rec;
  if (req.reconstruction) {
    rec = per_image_l1(out.reconstruction.value(), batch.images);
    auto r = scale(reconstruction_loss(out.reconstruction, images), w);
    total = total.valid() ? add(total, r) : r;
  }
  ctx.backward(total);
  return objective.combine(emb, rec, w);
}

template class Objective<float>;
template class Objective<double>;
template std::vector<Parameter<float>*> trainable_parameters(TrainableModel<float>&,
                                                             Objective<float>&);
template std::vector<Parameter<double>*> trainable_parameters(TrainableModel<double>&,
                                                              Objective<double>&);
template StepStats monolithic_gradients(TrainableModel<float>&, Objective<float>&,
                                        const GroupBatch<float>&);
template StepStats monolithic_gradients(TrainableModel<double>&, Objective<double>&,
                                        const GroupBatch<double>&);

}  // namespace aladin
