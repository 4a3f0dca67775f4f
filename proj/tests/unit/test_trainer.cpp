// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>

#include "aladin/autodiff/checkpoint.hpp"
#include "aladin/train/trainer.hpp"
#include "support/fixtures.hpp"

using namespace aladin;
using aladin::testing::noise_dataset;
using aladin::testing::tiny_model_config;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST(FitConfig, JsonRoundTripAndValidation) {
  FitConfig c;
  c.epochs = 3;
  c.chunk_size = 4;
  c.adam.lr = 3e-4;
  const FitConfig back = FitConfig::from_json(c.to_json());
  EXPECT_EQ(back.epochs, 3u);
  EXPECT_EQ(back.chunk_size, 4u);
  EXPECT_DOUBLE_EQ(back.adam.lr, 3e-4);
  EXPECT_DOUBLE_EQ(back.lr_decay, 0.9);
  EXPECT_THROW(FitConfig::from_json({{"chunk_size", 3}}), UsageError);
  EXPECT_THROW(FitConfig::from_json({{"batch_groups", 1}}), UsageError);
}

TEST(Fit, ZeroEpochsLeavesParametersUnchanged) {
  const auto ds = noise_dataset(4, 2, 8, 1);
  AladinModel<double> model(tiny_model_config(), 2);
  const auto before = model.parameters().get("style.conv0.weight").value;
  Objective<double> obj(LossConfig{});
  FitConfig cfg;
  cfg.epochs = 0;
  cfg.batch_groups = 2;
  Rng rng(3);
  const FitResult r = fit(model, obj, {&ds}, cfg, rng);
  EXPECT_EQ(r.steps, 0u);
  const auto after = model.parameters().get("style.conv0.weight").value;
  for (std::size_t i = 0; i < before.numel(); ++i) ASSERT_EQ(before[i], after[i]);
}

TEST(Fit, ReconstructionOnlyOverfitsOneImage) {
  // Two groups made of copies of a single image, so every batch holds it.
  auto ds = noise_dataset(1, 1, 8, 4);
  Tensor<float> img = ds.images;
  std::vector<Tensor<float>> copies(4, img);
  ds.images = concat_rows<float>(copies);
  ds.groups = {{0, 1}, {2, 3}};
  ds.semantic.assign(4, -1);

  AladinModel<double> model(tiny_model_config(), 5);
  LossConfig lc;
  lc.kind = LossKind::ReconstructionOnly;
  Objective<double> obj(lc);
  FitConfig cfg;
  cfg.epochs = 50;
  cfg.steps_per_epoch = 1;
  cfg.batch_groups = 2;
  cfg.adam.lr = 1e-3;
  cfg.lr_decay = 1.0;
  Rng rng(6);
  const FitResult r = fit(model, obj, {&ds}, cfg, rng);
  ASSERT_EQ(r.curve.size(), 50u);
  for (std::size_t i = 1; i < r.curve.size(); ++i) {
    EXPECT_LT(r.curve[i].stats.loss, r.curve[i - 1].stats.loss) << "step " << i;
  }
  EXPECT_EQ(r.curve[0].stats.embedding, 0.0);
}

TEST(Fit, BitIdenticalCurveAtFloat64) {
  const auto train = noise_dataset(6, 3, 8, 7);
  const auto val = noise_dataset(3, 3, 8, 8);
  auto run = [&] {
    AladinModel<double> model(tiny_model_config(), 9);
    Objective<double> obj(LossConfig{});
    FitConfig cfg;
    cfg.epochs = 3;
    cfg.batch_groups = 3;
    cfg.chunk_size = 2;
    cfg.adam.lr = 1e-3;
    Rng rng(10);
    return curve_csv(fit(model, obj, {&train, &val}, cfg, rng).curve);
  };
  const std::string a = run();
  EXPECT_EQ(a, run());
  EXPECT_NE(a.find("step,epoch,loss,embedding,reconstruction,val_ir1"), std::string::npos);
}

TEST(Fit, ChunkedTrainingTracksMonolithic) {
  const auto train = noise_dataset(6, 3, 8, 11);
  auto run = [&](std::size_t chunk) {
    AladinModel<double> model(tiny_model_config(), 12);
    Objective<double> obj(LossConfig{});
    FitConfig cfg;
    cfg.epochs = 2;
    cfg.batch_groups = 4;
    cfg.chunk_size = chunk;
    Rng rng(13);
    return fit(model, obj, {&train}, cfg, rng).curve;
  };
  const auto mono = run(0), acc = run(2);
  ASSERT_EQ(mono.size(), acc.size());
  EXPECT_EQ(mono[0].stats.loss, acc[0].stats.loss);
  for (std::size_t i = 0; i < mono.size(); ++i) {
    EXPECT_NEAR(mono[i].stats.loss, acc[i].stats.loss, 1e-9 * std::abs(mono[i].stats.loss));
  }
}

TEST(Fit, EarlyStoppingRestoresBestAndCheckpoints) {
  const auto train = noise_dataset(6, 3, 8, 14);
  const auto val = noise_dataset(4, 3, 8, 15);
  const std::string ckpt = temp_path("aladin_fit_test.aldn");
  std::filesystem::remove(ckpt);
  AladinModel<double> model(tiny_model_config(), 16);
  Objective<double> obj(LossConfig{});
  FitConfig cfg;
  cfg.epochs = 20;
  cfg.batch_groups = 3;
  // Updates too small to move any ranking: validation never improves after
  // the first epoch.
  cfg.adam.lr = 1e-12;
  cfg.patience = 2;
  cfg.checkpoint_path = ckpt;
  Rng rng(17);
  std::vector<CurvePoint> seen;
  const FitResult r = fit(model, obj, {&train, &val}, cfg, rng,
                          [&](const CurvePoint& p) { seen.push_back(p); });
  EXPECT_TRUE(r.early_stopped);
  EXPECT_EQ(r.epochs_run, 3u);
  EXPECT_EQ(r.best_epoch, 0u);
  EXPECT_EQ(seen.size(), r.curve.size());
  ASSERT_TRUE(std::filesystem::exists(ckpt));

  AladinModel<double> loaded(tiny_model_config(), 99);
  const auto meta = load_checkpoint(ckpt, loaded.parameters());
  EXPECT_EQ(meta.at("epoch").get<int>(), 0);
  for (auto* p : model.parameters().pointers()) {
    const auto& q = loaded.parameters().get(p->name).value;
    for (std::size_t i = 0; i < q.numel(); ++i) ASSERT_EQ(q[i], p->value[i]) << p->name;
  }
  EXPECT_DOUBLE_EQ(validation_ir1(model, val), r.best_val_ir1);
}

TEST(Fit, TripletAndSoftmaxKindsTrain) {
  const auto train = noise_dataset(6, 3, 8, 18);
  for (LossKind kind : {LossKind::Triplet, LossKind::Softmax, LossKind::Listwise}) {
    AladinModel<double> model(tiny_model_config(), 19);
    LossConfig lc;
    lc.kind = kind;
    lc.augmentation = true;
    Objective<double> obj(lc, train.num_groups(), 20);
    FitConfig cfg;
    cfg.epochs = 1;
    cfg.batch_groups = 3;
    cfg.chunk_size = 2;
    Rng rng(21);
    const FitResult r = fit(model, obj, {&train}, cfg, rng);
    EXPECT_EQ(r.steps, 3u) << loss_kind_name(kind);
  }
}

TEST(Fit, HardNegativesNeedSemantics) {
  const auto train = noise_dataset(6, 3, 8, 22);
  AladinModel<double> model(tiny_model_config(), 23);
  LossConfig lc;
  lc.hard_negatives = true;
  Objective<double> obj(lc);
  FitConfig cfg;
  cfg.epochs = 1;
  cfg.batch_groups = 3;
  Rng rng(24);
  EXPECT_THROW(fit(model, obj, {&train}, cfg, rng), UsageError);
  Tensor<float> sem({6, 2}, 0.0f);
  const FitResult r = fit(model, obj, {&train, nullptr, &sem}, cfg, rng);
  EXPECT_EQ(r.hard_negative_fallbacks, 0u);
}
