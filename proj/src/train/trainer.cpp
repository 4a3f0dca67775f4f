// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#include "aladin/train/trainer.hpp"

#include <cstdio>

#include "aladin/autodiff/checkpoint.hpp"
#include "aladin/core/errors.hpp"
#include "aladin/retrieval/metrics.hpp"
#include "aladin/train/augment.hpp"

namespace aladin {

void FitConfig::validate() const {
  if (batch_groups < 2) throw UsageError("batch_groups must be >= 2");
  if (chunk_size % 2) throw UsageError("chunk_size must be even (pairs stay in one chunk)");
  if (!(adam.lr > 0)) throw UsageError("learning rate must be > 0");
  if (!(lr_decay > 0 && lr_decay <= 1)) throw UsageError("lr_decay must be in (0, 1]");
  if (patience == 0) throw UsageError("patience must be >= 1");
}

nlohmann::json FitConfig::to_json() const {
  return {{"epochs", epochs},
          {"steps_per_epoch", steps_per_epoch},
          {"batch_groups", batch_groups},
          {"chunk_size", chunk_size},
          {"lr", adam.lr},
          {"beta1", adam.beta1},
          {"beta2", adam.beta2},
          {"adam_eps", adam.eps},
          {"lr_decay", lr_decay},
          {"patience", patience},
          {"checkpoint_path", checkpoint_path}};
}

FitConfig FitConfig::from_json(const nlohmann::json& j) {
  FitConfig c;
  c.epochs = j.value("epochs", c.epochs);
  c.steps_per_epoch = j.value("steps_per_epoch", c.steps_per_epoch);
  c.batch_groups = j.value("batch_groups", c.batch_groups);
  c.chunk_size = j.value("chunk_size", c.chunk_size);
  c.adam.lr = j.value("lr", c.adam.lr);
  c.adam.beta1 = j.value("beta1", c.adam.beta1);
  c.adam.beta2 = j.value("beta2", c.adam.beta2);
  c.adam.eps = j.value("adam_eps", c.adam.eps);
  c.lr_decay = j.value("lr_decay", c.lr_decay);
  c.patience = j.value("patience", c.patience);
  c.checkpoint_path = j.value("checkpoint_path", c.checkpoint_path);
  c.validate();
  return c;
}

std::string curve_csv(const std::vector<CurvePoint>& curve) {
  std::string out = "step,epoch,loss,embedding,reconstruction,val_ir1\n";
  char buf[256];
  for (const auto& p : curve) {
    std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g,%.17g,%.17g,", p.step, p.epoch, p.stats.loss,
                  p.stats.embedding, p.stats.reconstruction);
    out += buf;
    if (p.val_ir1 >= 0) {
      std::snprintf(buf, sizeof buf, "%.6f", p.val_ir1);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

template <class T>
double validation_ir1(TrainableModel<T>& model, const GroupedDataset& ds) {
  const Tensor<float> vecs = model.retrieval_embedding(ds.images.cast<T>()).template cast<float>();
  return evaluate_retrieval(vecs, ds.group_of_image(), {}).ir_top1;
}

namespace {

template <class T>
std::vector<Tensor<T>> snapshot(ParameterSet<T>& ps) {
  std::vector<Tensor<T>> out;
  for (auto* p : ps.pointers()) out.push_back(p->value);
  return out;
}

template <class T>
void restore(ParameterSet<T>& ps, const std::vector<Tensor<T>>& values) {
  auto ptrs = ps.pointers();
  for (std::size_t i = 0; i < ptrs.size(); ++i) ptrs[i]->value = values[i];
}

}  // namespace

template <class T>
FitResult fit(TrainableModel<T>& model, Objective<T>& objective, const FitInputs& data,
              const FitConfig& cfg, Rng& rng, const std::function<void(const CurvePoint&)>& on_step) {
  cfg.validate();
  if (!data.train) throw UsageError("fit: no training data");
  const LossConfig& lc = objective.config();
  if (lc.hard_negatives && !data.group_semantic) {
    throw UsageError("fit: hard negatives need semantic group embeddings");
  }
  const auto eligible_list = eligible_groups(*data.train);
  const std::size_t eligible = eligible_list.size();
  std::size_t pool = 0;
  for (std::size_t g : eligible_list) pool += data.train->groups[g].size();
  const std::size_t n = cfg.batch_groups;
  if (eligible < n) {
    throw DataError("fit: " + std::to_string(eligible) + " groups with two or more images, batch needs " +
                    std::to_string(n));
  }
  const std::size_t steps_per_epoch =
      cfg.steps_per_epoch ? cfg.steps_per_epoch : std::max<std::size_t>(1, pool / (2 * n));
  const bool chunked = cfg.chunk_size > 0 && cfg.chunk_size < 2 * n;
  const AccumPlan plan = chunked ? AccumPlan::make(2 * n, cfg.chunk_size) : AccumPlan{};

  Adam<T> opt(cfg.adam);
  FitResult res;
  HardNegativeStats hn;
  std::vector<Tensor<T>> best;
  std::size_t stale = 0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t s = 0; s < steps_per_epoch; ++s) {
      GroupBatch<T> batch =
          lc.hard_negatives
              ? sample_hard_negative_batch<T>(*data.train, n, *data.group_semantic,
                                              lc.hn_threshold, rng, &hn)
              : sample_group_batch<T>(*data.train, n, rng);
      if (lc.kind == LossKind::Triplet) assign_random_negatives(batch, rng);
      if (lc.augmentation) augment_batch(batch.images, rng);
      CurvePoint pt;
      pt.step = res.steps++;
      pt.epoch = epoch;
      pt.stats = chunked ? big_batch_step(model, objective, batch, plan, opt)
                         : monolithic_step(model, objective, batch, opt);
      res.curve.push_back(pt);
      if (on_step && !(data.validation && s + 1 == steps_per_epoch)) on_step(pt);
    }
    res.epochs_run = epoch + 1;
    opt.set_lr(opt.lr() * cfg.lr_decay);

    if (!data.validation) continue;
    const double ir1 = validation_ir1(model, *data.validation);
    res.curve.back().val_ir1 = ir1;
    if (on_step) on_step(res.curve.back());
    if (ir1 > res.best_val_ir1) {
      res.best_val_ir1 = ir1;
      res.best_epoch = epoch;
      best = snapshot(model.parameters());
      stale = 0;
      if (!cfg.checkpoint_path.empty()) {
        save_checkpoint(cfg.checkpoint_path, model.parameters(),
                        {{"kind", model.kind()},
                         {"model", model.config_json()},
                         {"epoch", epoch},
                         {"val_ir1", ir1}});
      }
    } else if (++stale >= cfg.patience) {
      res.early_stopped = true;
      break;
    }
  }
  if (!best.empty()) restore(model.parameters(), best);
  res.hard_negative_fallbacks = hn.fallbacks;
  return res;
}

template double validation_ir1(TrainableModel<float>&, const GroupedDataset&);
template double validation_ir1(TrainableModel<double>&, const GroupedDataset&);
template FitResult fit(TrainableModel<float>&, Objective<float>&, const FitInputs&,
                       const FitConfig&, Rng&, const std::function<void(const CurvePoint&)>&);
template FitResult fit(TrainableModel<double>&, Objective<double>&, const FitInputs&,
                       const FitConfig&, Rng&, const std::function<void(const CurvePoint&)>&);

}  // namespace aladin
