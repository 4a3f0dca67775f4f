// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "aladin/model/aladin_model.hpp"
#include "support/gradcheck.hpp"

using namespace aladin;
using aladin::testing::random_tensor;
using aladin::testing::weighted_sum;

namespace {

AladinConfig tiny_config() {
  AladinConfig c;
  c.style_channels = {2, 3};
  c.content_channels = {2, 3};
  c.projection_hidden = 5;
  c.projection_out = 3;
  return c;
}

// Channel statistics of a tensor computed directly in long double.
void reference_stats(const Tensor<double>& x, std::size_t n, std::size_t c, double& m, double& v) {
  const std::size_t hw = x.dim(2) * x.dim(3);
  const double* p = x.raw() + (n * x.dim(1) + c) * hw;
  long double s = 0;
  for (std::size_t i = 0; i < hw; ++i) s += p[i];
  const long double mu = s / hw;
  long double q = 0;
  for (std::size_t i = 0; i < hw; ++i) q += (p[i] - mu) * (p[i] - mu);
  m = static_cast<double>(mu);
  v = static_cast<double>(q / hw);
}

}  // namespace

TEST(AladinConfig, DefaultCodeIs896) {
  AladinConfig c;
  EXPECT_EQ(c.style_code_dim(), 896u);
  EXPECT_EQ(AladinConfig::large().style_code_dim(), 2u * (64 + 128 + 256 + 512 + 512));
  EXPECT_EQ(AladinConfig::large().variant, Variant::L);
}

TEST(AladinConfig, JsonRoundTrip) {
  AladinConfig c = tiny_config();
  c.adain_mode = AdainMode::Variance;
  const AladinConfig back = AladinConfig::from_json(c.to_json());
  EXPECT_EQ(back.style_channels, c.style_channels);
  EXPECT_EQ(back.content_channels, c.content_channels);
  EXPECT_EQ(back.adain_mode, AdainMode::Variance);
  EXPECT_EQ(back.projection_out, 3);
  EXPECT_THROW(AladinConfig::from_json({{"adain_mode", "bogus"}}), UsageError);
  EXPECT_THROW(AladinConfig::from_json({{"conv_kernel", 4}}), UsageError);
}

TEST(AladinConfig, SegmentBoundaries) {
  const auto layout = style_code_layout(AladinConfig{});
  ASSERT_EQ(layout.size(), 3u);
  EXPECT_EQ(2 * layout[0].channels, 128u);
  EXPECT_EQ(2 * layout[1].channels, 256u);
  EXPECT_EQ(2 * layout[2].channels, 512u);
  EXPECT_EQ(layout[1].mean_offset, 128u);
  EXPECT_EQ(layout[2].var_offset, 128u + 256u + 256u);
}

TEST(EncodeStyle, CodeLengthAcrossConfigs) {
  for (const auto& channels : std::vector<std::vector<int>>{{4}, {2, 3}, {3, 1, 2}}) {
    AladinConfig c = tiny_config();
    c.style_channels = channels;
    AladinModel<double> model(c, 3);
    GradContext<double> ctx(GradContext<double>::Mode::NoGrad);
    Rng rng(1);
    auto code = model.encode_style(ctx.constant(random_tensor({2, 3, 8, 8}, rng))).code;
    EXPECT_EQ(code.shape(), (Shape{2, c.style_code_dim()}));
  }
}

TEST(EncodeStyle, DefaultConfigGives896) {
  AladinModel<float> model(AladinConfig{}, 7);
  Rng rng(2);
  const auto codes = model.retrieval_embedding(aladin::testing::random_tensor_t<float>({1, 3, 16, 16}, rng));
  EXPECT_EQ(codes.shape(), (Shape{1, 896}));
}

TEST(EncodeStyle, IdenticalImagesGiveIdenticalCodes) {
  AladinModel<float> model(tiny_config(), 11);
  Rng rng(3);
  auto img = aladin::testing::random_tensor_t<float>({1, 3, 8, 8}, rng);
  std::vector<Tensor<float>> pair{img, img};
  const auto codes = model.retrieval_embedding(concat_rows<float>(pair));
  for (std::size_t j = 0; j < codes.dim(1); ++j) EXPECT_EQ(codes[j], codes[codes.dim(1) + j]);
}

TEST(EncodeStyle, ZeroImageZeroBiasesGivesZeroCode) {
  AladinModel<double> model(tiny_config(), 5);
  const auto code = model.retrieval_embedding(Tensor<double>::zeros({1, 3, 8, 8}));
  for (double v : code.data()) EXPECT_EQ(v, 0.0);
}

TEST(EncodeStyle, VariancesAreNonNegative) {
  AladinModel<double> model(tiny_config(), 5);
  Rng rng(8);
  const auto code = model.retrieval_embedding(random_tensor({3, 3, 8, 8}, rng));
  for (const auto& seg : style_code_layout(model.config())) {
    for (std::size_t n = 0; n < 3; ++n) {
      for (std::size_t c = 0; c < seg.channels; ++c) {
        EXPECT_GE(code[n * code.dim(1) + seg.var_offset + c], 0.0);
      }
    }
  }
}

TEST(EncodeStyle, IndivisibleSpatialIsDimensionError) {
  AladinModel<double> model(tiny_config(), 5);
  GradContext<double> ctx;
  EXPECT_THROW(model.encode_style(ctx.constant(Tensor<double>({1, 3, 6, 8}))), DimensionError);
  EXPECT_THROW(model.encode_style(ctx.constant(Tensor<double>({1, 1, 8, 8}))), DimensionError);
}

TEST(EncodeStyle, StatisticsIgnoreSpatialPermutation) {
  Rng rng(21);
  auto x = random_tensor({2, 3, 4, 5}, rng);
  Tensor<double> permuted = x;
  const std::size_t hw = 20;
  for (std::size_t plane = 0; plane < 6; ++plane) {
    std::vector<std::size_t> order(hw);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    for (std::size_t i = 0; i < hw; ++i) permuted[plane * hw + i] = x[plane * hw + order[i]];
  }
  GradContext<double> ctx(GradContext<double>::Mode::NoGrad);
  auto [m1, v1] = channel_stats(ctx.constant(x));
  auto [m2, v2] = channel_stats(ctx.constant(permuted));
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_NEAR(m1.value()[i], m2.value()[i], 1e-12);
    EXPECT_NEAR(v1.value()[i], v2.value()[i], 1e-12);
  }
}

TEST(Adain, OwnStatisticsAreAFixedPoint) {
  Rng rng(4);
  for (AdainMode mode : {AdainMode::Std, AdainMode::Variance}) {
    GradContext<double> ctx;
    auto x = ctx.constant(random_tensor({2, 3, 4, 4}, rng, -3.0, 3.0));
    auto [m, v] = channel_stats(x);
    auto y = adain(x, m, v, mode, 0.0);
    EXPECT_EQ(y.value(), x.value());
  }
}

TEST(Adain, StdModeWithEpsStillFixedPoint) {
  Rng rng(5);
  GradContext<double> ctx;
  auto x = ctx.constant(random_tensor({1, 2, 3, 3}, rng));
  auto [m, v] = channel_stats(x);
  auto y = adain(x, m, v, AdainMode::Std);
  EXPECT_EQ(y.value(), x.value());
}

TEST(Adain, DirectFormula) {
  GradContext<double> ctx;
  auto x = ctx.constant(Tensor<double>({1, 1, 2, 2}, std::vector<double>{1, 2, 3, 4}));
  auto y = adain(x, ctx.constant(Tensor<double>({1, 1}, 10.0)),
                 ctx.constant(Tensor<double>({1, 1}, 4.0)), AdainMode::Std, 0.0);
  for (std::size_t i = 0; i < 4; ++i) {
    const double expect = 2.0 * (x.value()[i] - 2.5) / std::sqrt(1.25) + 10.0;
    EXPECT_NEAR(y.value()[i], expect, 1e-12);
  }
}

TEST(Adain, VarianceModeIsLiteralRatio) {
  GradContext<double> ctx;
  auto x = ctx.constant(Tensor<double>({1, 1, 2, 2}, std::vector<double>{1, 2, 3, 4}));
  auto y = adain(x, ctx.constant(Tensor<double>({1, 1}, 10.0)),
                 ctx.constant(Tensor<double>({1, 1}, 4.0)), AdainMode::Variance, 0.0);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(y.value()[i], 4.0 * (x.value()[i] - 2.5) / 1.25 + 10.0, 1e-12);
  }
}

TEST(Adain, StdModeMatchesTargetMoments) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    GradContext<double> ctx(GradContext<double>::Mode::NoGrad);
    Tensor<double> x = random_tensor({2, 4, 6, 6}, rng, -2.0, 2.0);
    // Source channels with variance of order one or more.
    for (auto& e : x.data()) e *= 2.0;
    auto m = random_tensor({2, 4}, rng, -5.0, 5.0);
    auto v = random_tensor({2, 4}, rng, 0.1, 9.0);
    auto y = adain(ctx.constant(x), ctx.constant(m), ctx.constant(v), AdainMode::Std);
    auto [ym, yv] = channel_stats(y);
    for (std::size_t n = 0; n < 2; ++n) {
      for (std::size_t c = 0; c < 4; ++c) {
        double rm, rv;
        reference_stats(y.value(), n, c, rm, rv);
        const std::size_t i = n * 4 + c;
        EXPECT_NEAR(ym.value()[i], m[i], 1e-5);
        EXPECT_LE(std::abs(yv.value()[i] - v[i]), 1e-5 * std::max(1.0, v[i]));
        EXPECT_NEAR(rm, ym.value()[i], 1e-9);
        EXPECT_NEAR(rv, yv.value()[i], 1e-9);
      }
    }
  }
}

TEST(Adain, NegativeTargetVarianceIsDomainError) {
  GradContext<double> ctx;
  auto x = ctx.constant(Tensor<double>({1, 1, 2, 2}, 1.0));
  EXPECT_THROW(adain(x, ctx.constant(Tensor<double>({1, 1}, 0.0)),
                     ctx.constant(Tensor<double>({1, 1}, -1.0)), AdainMode::Std),
               DomainError);
}

TEST(EncodeContent, SixtyFourInputGivesFourByFour) {
  AladinConfig c;
  c.content_channels = {2, 2, 2, 3};
  AladinModel<float> model(c, 9);
  GradContext<float> ctx(GradContext<float>::Mode::NoGrad);
  auto feat = model.encode_content(ctx.constant(Tensor<float>({1, 3, 64, 64})));
  EXPECT_EQ(feat.shape(), (Shape{1, 3, 4, 4}));
}

TEST(EncodeContent, IdenticalInputsIdenticalOutputs) {
  AladinModel<double> model(tiny_config(), 9);
  Rng rng(10);
  auto img = random_tensor({1, 3, 8, 8}, rng);
  GradContext<double> a(GradContext<double>::Mode::NoGrad), b(GradContext<double>::Mode::NoGrad);
  EXPECT_EQ(model.encode_content(a.constant(img)).value(),
            model.encode_content(b.constant(img)).value());
}

TEST(Decode, OutputShapeEqualsInputShape) {
  for (auto cfg : {tiny_config(), AladinConfig{}}) {
    AladinModel<float> model(cfg, 12);
    GradContext<float> ctx(GradContext<float>::Mode::NoGrad);
    Rng rng(13);
    auto img = ctx.constant(aladin::testing::random_tensor_t<float>({2, 3, 16, 16}, rng));
    auto out = model.forward(img, {true, true, true});
    EXPECT_EQ(out.reconstruction.shape(), img.shape());
  }
}

TEST(Decode, DeeperStyleThanContent) {
  AladinConfig c = tiny_config();
  c.style_channels = {2, 2, 3};
  AladinModel<double> model(c, 12);
  GradContext<double> ctx(GradContext<double>::Mode::NoGrad);
  Rng rng(14);
  auto img = ctx.constant(random_tensor({1, 3, 8, 8}, rng));
  EXPECT_EQ(model.forward(img, {true, true, true}).reconstruction.shape(), img.shape());
}

TEST(Decode, CodeLengthMismatchIsDimensionError) {
  AladinModel<double> model(tiny_config(), 1);
  GradContext<double> ctx;
  auto content = model.encode_content(ctx.constant(Tensor<double>({1, 3, 8, 8})));
  EXPECT_THROW(model.decode(content, ctx.constant(Tensor<double>({1, 7}))), DimensionError);
}

TEST(Decode, ChannelCountsMirrorStyleBranch) {
  AladinModel<float> model(AladinConfig{}, 1);
  auto& p = model.parameters();
  EXPECT_EQ(p.get("decoder.conv0.weight").value.dim(0), 256u);
  EXPECT_EQ(p.get("decoder.conv1.weight").value.dim(0), 128u);
  EXPECT_EQ(p.get("decoder.conv2.weight").value.dim(0), 64u);
  EXPECT_EQ(p.get("decoder.out.weight").value.dim(0), 3u);
}

TEST(Project, UnitNormOutputs) {
  AladinModel<double> model(AladinConfig{}, 2);
  GradContext<double> ctx(GradContext<double>::Mode::NoGrad);
  Rng rng(15);
  auto h = model.project(ctx.constant(random_tensor({4, 896}, rng, 0.0, 3.0)));
  ASSERT_EQ(h.shape(), (Shape{4, 128}));
  for (std::size_t n = 0; n < 4; ++n) {
    double s = 0;
    for (std::size_t j = 0; j < 128; ++j) s += h.value()[n * 128 + j] * h.value()[n * 128 + j];
    EXPECT_NEAR(std::sqrt(s), 1.0, 1e-6);
  }
  auto z = model.project(ctx.constant(Tensor<double>::zeros({1, 896})));
  EXPECT_TRUE(z.value().all_finite());
}

TEST(Project, GradientMatchesFiniteDifferences) {
  AladinModel<double> model(tiny_config(), 4);
  Rng rng(16);
  const std::size_t d = model.config().style_code_dim();
  const double err = aladin::testing::gradcheck(
      [&](GradContext<double>& ctx, std::vector<Var<double>>& in) {
        return weighted_sum(ctx, model.project(in[0]));
      },
      {random_tensor({3, d}, rng)});
  EXPECT_LE(err, 1e-4);
}

TEST(EncodeContent, GradientMatchesFiniteDifferences) {
  AladinModel<double> model(tiny_config(), 4);
  Rng rng(17);
  const double err = aladin::testing::gradcheck(
      [&](GradContext<double>& ctx, std::vector<Var<double>>& in) {
        return weighted_sum(ctx, model.encode_content(in[0]));
      },
      {random_tensor({1, 3, 8, 8}, rng)});
  EXPECT_LE(err, 1e-4);
}

// Full forward (embedding and reconstruction) against central differences on
// every model parameter.
TEST(AladinModel, ParameterGradientsMatchFiniteDifferences) {
  AladinModel<double> model(tiny_config(), 19);
  Rng rng(18);
  // Non-zero biases so every path carries signal.
  for (auto& p : model.parameters()) {
    for (auto& v : p.value.data()) v += rng.uniform(-0.1, 0.1);
  }
  const auto images = random_tensor({2, 3, 8, 8}, rng);
  auto loss_of = [&](GradContext<double>& ctx) {
    auto out = model.forward(ctx.constant(images), {true, true, true});
    return add(weighted_sum(ctx, out.embedding, 1), weighted_sum(ctx, out.reconstruction, 2));
  };

  model.parameters().zero_grad();
  {
    GradContext<double> ctx;
    ctx.backward(loss_of(ctx));
  }
  double worst = 0.0;
  const double step = 1e-5;
  for (auto& p : model.parameters()) {
    ASSERT_TRUE(p.has_grad()) << p.name;
    for (std::size_t i = 0; i < p.value.numel(); ++i) {
      const double orig = p.value[i];
      p.value[i] = orig + step;
      GradContext<double> up(GradContext<double>::Mode::NoGrad);
      const double fu = loss_of(up).value().item();
      p.value[i] = orig - step;
      GradContext<double> down(GradContext<double>::Mode::NoGrad);
      const double fd = loss_of(down).value().item();
      p.value[i] = orig;
      const double num = (fu - fd) / (2 * step);
      // Biases feeding instance norm or AdaIN have an exactly zero gradient;
      // the difference quotient there is pure roundoff near 1e-10.
      const double denom = std::max({std::abs(num), std::abs(p.grad[i]), 1e-5});
      worst = std::max(worst, std::abs(num - p.grad[i]) / denom);
    }
  }
  EXPECT_LE(worst, 1e-4);
}

TEST(AladinModel, SameSeedSameWeights) {
  AladinModel<float> a(tiny_config(), 42), b(tiny_config(), 42), c(tiny_config(), 43);
  EXPECT_EQ(a.parameters().get("style.conv0.weight").value,
            b.parameters().get("style.conv0.weight").value);
  EXPECT_FALSE(a.parameters().get("style.conv0.weight").value ==
               c.parameters().get("style.conv0.weight").value);
}

TEST(AladinModel, RetrievalEmbeddingIsBatchIndependent) {
  AladinModel<float> model(tiny_config(), 42);
  Rng rng(20);
  auto batch = aladin::testing::random_tensor_t<float>({40, 3, 8, 8}, rng);
  const auto all = model.retrieval_embedding(batch);
  const auto one = model.retrieval_embedding(slice_rows(batch, 37, 38));
  for (std::size_t j = 0; j < one.numel(); ++j) EXPECT_EQ(one[j], all[37 * one.numel() + j]);
}
