// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "aladin/accum/accumulate.hpp"
#include "aladin/model/aladin_model.hpp"
#include "support/fixtures.hpp"
#include "support/gradcheck.hpp"
#include "support/loss_oracles.hpp"

using namespace aladin;
using aladin::testing::contrastive_oracle;
using aladin::testing::noise_dataset;
using aladin::testing::relative_l2;
using aladin::testing::tiny_model_config;
using aladin::testing::unit_rows;

namespace {

template <class T>
GroupBatch<T> make_batch(std::size_t n, std::uint64_t seed) {
  const GroupedDataset ds = noise_dataset(n + 2, 3, 8, seed);
  Rng rng(seed + 1);
  auto b = sample_group_batch<T>(ds, n, rng);
  assign_random_negatives(b, rng);
  return b;
}

template <class T>
std::vector<Tensor<T>> grads_of(std::vector<Parameter<T>*> ps) {
  std::vector<Tensor<T>> out;
  for (auto* p : ps) out.push_back(p->has_grad() ? p->grad : Tensor<T>::zeros(p->value.shape()));
  return out;
}

// Worst per-parameter relative L2 gap between chunked and monolithic grads.
template <class T>
double equivalence_gap(std::size_t n, std::size_t chunk, LossConfig cfg, std::uint64_t seed) {
  const auto batch = make_batch<T>(n, seed);
  AladinModel<T> model(tiny_model_config(), seed);
  Objective<T> objective(cfg, n + 2, seed);
  monolithic_gradients(model, objective, batch);
  const auto mono = grads_of(trainable_parameters(model, objective));
  accumulated_gradients(model, objective, batch, AccumPlan::make(batch.size(), chunk));
  const auto acc = grads_of(trainable_parameters(model, objective));
  double worst = 0;
  for (std::size_t k = 0; k < mono.size(); ++k) {
    worst = std::max(worst, relative_l2(acc[k], mono[k]));
  }
  return worst;
}

class RandomForwardModel final : public TrainableModel<double> {
 public:
  ParameterSet<double>& parameters() override { return params_; }
  ForwardResult<double> forward(const Var<double>&, const ForwardRequest&) override { return {}; }
  Tensor<double> retrieval_embedding(const Tensor<double>& x) override { return x; }
  bool supports_reconstruction() const override { return false; }
  bool deterministic_forward() const override { return false; }
  std::string kind() const override { return "dropout-like"; }
  nlohmann::json config_json() const override { return {}; }

 private:
  ParameterSet<double> params_;
};

}  // namespace

TEST(AccumPlan, PartitionsBatchAndKeepsPairs) {
  const auto p = AccumPlan::make(10, 4);
  ASSERT_EQ(p.chunks.size(), 3u);
  EXPECT_EQ(p.chunks[0], std::make_pair(std::size_t(0), std::size_t(4)));
  EXPECT_EQ(p.chunks[2], std::make_pair(std::size_t(8), std::size_t(10)));
  EXPECT_NO_THROW(p.check(10));
  EXPECT_THROW(p.check(12), UsageError);
  EXPECT_THROW(AccumPlan::make(8, 3), UsageError);
  EXPECT_THROW(AccumPlan::make(8, 10), UsageError);
  EXPECT_THROW(AccumPlan::make(7, 2), UsageError);
  EXPECT_THROW(AccumPlan::make(8, 0), UsageError);
}

TEST(AccumulateForward, BitIdenticalToSingleForward) {
  const auto batch = make_batch<double>(8, 3);
  AladinModel<double> model(tiny_model_config(), 4);
  ForwardRequest req;
  GradContext<double> ctx(GradContext<double>::Mode::NoGrad);
  const Tensor<double> single = model.forward(ctx.constant(batch.images), req).embedding.value();
  for (std::size_t c : {2, 4, 6, 16}) {
    const Tensor<double> acc = accumulate_forward(model, batch, AccumPlan::make(16, c), req);
    ASSERT_EQ(acc.shape(), single.shape());
    for (std::size_t i = 0; i < acc.numel(); ++i) ASSERT_EQ(acc[i], single[i]) << "chunk " << c;
  }
  EXPECT_THROW(accumulate_forward(model, batch, AccumPlan::make(8, 4), req), UsageError);
}

TEST(LogitGrads, CotangentsMatchFiniteDifferences) {
  Rng rng(5);
  const std::vector<int> g{0, 0, 1, 1, 2, 2};
  const Tensor<double> e = unit_rows(aladin::testing::random_tensor({6, 4}, rng));
  const auto lg = loss_and_logit_grads(e, g, 0.3);
  EXPECT_NEAR(lg.loss, contrastive_oracle(e, g, 0.3), 1e-10);
  const double h = 1e-6;
  double worst = 0;
  for (std::size_t i = 0; i < e.numel(); ++i) {
    Tensor<double> up = e, dn = e;
    up[i] += h;
    dn[i] -= h;
    const double fd = (contrastive_oracle(up, g, 0.3) - contrastive_oracle(dn, g, 0.3)) / (2 * h);
    worst = std::max(worst, std::abs(fd - lg.cotangents[i]) / std::max(1e-6, std::abs(fd)));
  }
  EXPECT_LE(worst, 1e-4);
}

TEST(LogitGrads, TemperatureMatchesDirectEvaluation) {
  Rng rng(6);
  const std::vector<int> g{0, 0, 1, 1, 2, 2, 3, 3};
  const Tensor<double> e = unit_rows(aladin::testing::random_tensor({8, 5}, rng));
  for (double tau : {0.05, 0.1, 0.5, 2.0}) {
    EXPECT_NEAR(loss_and_logit_grads(e, g, tau).loss, contrastive_oracle(e, g, tau),
                1e-9 * (1 + std::abs(contrastive_oracle(e, g, tau))));
  }
  // Sharper temperatures give larger cotangents on the same logits.
  double n_sharp = 0, n_soft = 0;
  const auto sharp = loss_and_logit_grads(e, g, 0.05).cotangents;
  const auto soft = loss_and_logit_grads(e, g, 2.0).cotangents;
  for (std::size_t i = 0; i < e.numel(); ++i) {
    n_sharp += sharp[i] * sharp[i];
    n_soft += soft[i] * soft[i];
  }
  EXPECT_GT(n_sharp, n_soft);
}

TEST(LogitGrads, IdenticalLogitsGiveSymmetricPairCotangents) {
  Tensor<double> e({8, 3}, 0.0);
  for (std::size_t i = 0; i < 8; ++i) e[i * 3] = 1.0;
  const auto lg = loss_and_logit_grads(e, {0, 0, 1, 1, 2, 2, 3, 3}, 0.1);
  EXPECT_NEAR(lg.loss, 8 * std::log(6.0), 1e-9);
  for (std::size_t r = 0; r < 8; r += 2) {
    for (std::size_t k = 0; k < 3; ++k) {
      EXPECT_NEAR(lg.cotangents[r * 3 + k], lg.cotangents[(r + 1) * 3 + k], 1e-12);
      EXPECT_NEAR(lg.cotangents[r * 3 + k], lg.cotangents[k], 1e-12);
    }
  }
}

TEST(Reforward, ZeroCotangentsGiveZeroGrads) {
  const auto batch = make_batch<double>(4, 7);
  AladinModel<double> model(tiny_model_config(), 8);
  ForwardRequest req;
  reforward_apply(model, batch, AccumPlan::make(8, 2), Tensor<double>::zeros({8, 3}), req, 0.0);
  std::size_t touched = 0;
  for (auto* p : model.parameters().pointers()) {
    if (!p->has_grad()) continue;
    ++touched;
    for (double g : p->grad.data()) ASSERT_EQ(g, 0.0) << p->name;
  }
  EXPECT_GT(touched, 0u);
  EXPECT_THROW(reforward_apply(model, batch, AccumPlan::make(8, 2),
                               Tensor<double>::zeros({6, 3}), req, 0.0),
               DimensionError);
}

TEST(Reforward, SingleChunkMatchesOrdinaryBackward) {
  EXPECT_LE(equivalence_gap<double>(4, 8, LossConfig{}, 9), 1e-12);
}

TEST(Accumulation, GradientEquivalenceFloat64) {
  for (std::size_t n : {4, 8, 16}) {
    for (std::size_t c : {std::size_t(2), std::size_t(4), n}) {
      EXPECT_LE(equivalence_gap<double>(n, c, LossConfig{}, 100 + n), 1e-6)
          << "N=" << n << " chunk=" << c;
    }
  }
}

TEST(Accumulation, GradientEquivalenceFloat32) {
  for (std::size_t n : {4, 8, 16}) {
    for (std::size_t c : {std::size_t(2), std::size_t(4), n}) {
      EXPECT_LE(equivalence_gap<float>(n, c, LossConfig{}, 200 + n), 1e-3)
          << "N=" << n << " chunk=" << c;
    }
  }
}

TEST(Accumulation, EveryLossKindIsEquivalent) {
  for (LossKind kind : {LossKind::Triplet, LossKind::Listwise, LossKind::Softmax,
                        LossKind::ReconstructionOnly}) {
    LossConfig cfg;
    cfg.kind = kind;
    EXPECT_LE(equivalence_gap<double>(6, 4, cfg, 31), 1e-6) << loss_kind_name(kind);
  }
  LossConfig raw;
  raw.use_projection = false;
  raw.lambda_rec = 0;
  EXPECT_LE(equivalence_gap<double>(6, 2, raw, 32), 1e-6);
}

TEST(BigBatchStep, MatchesMonolithicStep) {
  const auto batch = make_batch<double>(8, 11);
  AladinModel<double> mono(tiny_model_config(), 12), chunked(tiny_model_config(), 12);
  Objective<double> obj_a(LossConfig{}), obj_b(LossConfig{});
  Adam<double> opt_a(AdamConfig{1e-2}), opt_b(AdamConfig{1e-2});
  const auto plan = AccumPlan::make(16, 4);
  const StepStats a = monolithic_step(mono, obj_a, batch, opt_a);
  const StepStats b = big_batch_step(chunked, obj_b, batch, plan, opt_b);
  // The reported loss is reduced identically on both paths.
  EXPECT_EQ(a.loss, b.loss);
  EXPECT_EQ(a.embedding, b.embedding);
  EXPECT_EQ(a.reconstruction, b.reconstruction);
  for (auto* p : mono.parameters().pointers()) {
    EXPECT_LE(relative_l2(chunked.parameters().get(p->name).value, p->value), 1e-6) << p->name;
  }

  // Later steps start from parameters that already differ in the last bits,
  // so they are compared over the whole parameter vector.
  for (int step = 0; step < 4; ++step) {
    const StepStats x = monolithic_step(mono, obj_a, batch, opt_a);
    const StepStats y = big_batch_step(chunked, obj_b, batch, plan, opt_b);
    EXPECT_NEAR(x.loss, y.loss, 1e-9 * std::abs(x.loss));
  }
  double num = 0, den = 0;
  for (auto* p : mono.parameters().pointers()) {
    const auto& q = chunked.parameters().get(p->name).value;
    for (std::size_t i = 0; i < q.numel(); ++i) {
      num += (q[i] - p->value[i]) * (q[i] - p->value[i]);
      den += p->value[i] * p->value[i];
    }
  }
  EXPECT_LE(std::sqrt(num / den), 1e-6);
}

TEST(BigBatchStep, DeterministicAcrossRuns) {
  auto run = [] {
    const auto batch = make_batch<double>(4, 13);
    AladinModel<double> model(tiny_model_config(), 14);
    Objective<double> obj(LossConfig{});
    Adam<double> opt;
    big_batch_step(model, obj, batch, AccumPlan::make(8, 2), opt);
    return model.parameters().get("style.conv1.weight").value;
  };
  const auto a = run(), b = run();
  for (std::size_t i = 0; i < a.numel(); ++i) ASSERT_EQ(a[i], b[i]);
}

TEST(Accumulation, PeakRecordedMemoryScalesWithChunk) {
  const auto batch = make_batch<double>(16, 15);
  AladinModel<double> model(tiny_model_config(), 16);
  Objective<double> obj(LossConfig{});
  auto& meter = ActivationMeter::instance();

  meter.reset_peak();
  const std::size_t base = meter.live;
  monolithic_gradients(model, obj, batch);
  const double mono = double(meter.peak - base);

  for (std::size_t c : {2, 4, 8}) {
    const auto plan = AccumPlan::make(32, c);
    meter.reset_peak();
    const std::size_t tbase = meter.transient_live;
    const Tensor<double> e = accumulate_forward(model, batch, plan, obj.request(model));
    const double fwd = double(meter.transient_peak - tbase);
    meter.reset_peak();
    reforward_apply(model, batch, plan, Tensor<double>::zeros(e.shape()), obj.request(model),
                    obj.config().lambda_rec);
    const double re = double(meter.peak - base);
    const double frac = double(c) / 32.0;
    EXPECT_LE(re, frac * mono * 1.05) << "chunk " << c;
    EXPECT_LE(fwd, frac * mono * 1.05) << "chunk " << c;
  }
}

TEST(Accumulation, RejectsNondeterministicModels) {
  RandomForwardModel model;
  const auto batch = make_batch<double>(2, 17);
  EXPECT_THROW(accumulate_forward(model, batch, AccumPlan::make(4, 2), ForwardRequest{}),
               UsageError);
}
