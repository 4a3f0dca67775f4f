// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#include "aladin/model/aladin_model.hpp"

#include <cmath>
#include <numeric>

namespace aladin {

std::size_t AladinConfig::style_code_dim() const {
  return 2 * static_cast<std::size_t>(
                 std::accumulate(style_channels.begin(), style_channels.end(), 0));
}

std::size_t AladinConfig::spatial_multiple() const {
  const std::size_t depth = std::max(style_channels.size(), content_channels.size());
  std::size_t m = 1;
  for (std::size_t i = 0; i < depth; ++i) m *= static_cast<std::size_t>(conv_stride);
  return m;
}

void AladinConfig::validate() const {
  if (style_channels.empty()) throw UsageError("style_channels must not be empty");
  if (content_channels.empty()) throw UsageError("content_channels must not be empty");
  for (int c : style_channels)
    if (c <= 0) throw UsageError("style_channels entries must be positive");
  for (int c : content_channels)
    if (c <= 0) throw UsageError("content_channels entries must be positive");
  if (conv_kernel < 1 || conv_kernel % 2 == 0) throw UsageError("conv_kernel must be odd");
  if (conv_stride < 1) throw UsageError("conv_stride must be >= 1");
  if (projection_hidden <= 0 || projection_out <= 0) {
    throw UsageError("projection sizes must be positive");
  }
}

nlohmann::json AladinConfig::to_json() const {
  return {{"style_channels", style_channels},
          {"content_channels", content_channels},
          {"conv_kernel", conv_kernel},
          {"conv_stride", conv_stride},
          {"projection_hidden", projection_hidden},
          {"projection_out", projection_out},
          {"adain_mode", adain_mode == AdainMode::Std ? "std" : "variance"},
          {"variant", variant == Variant::S ? "S" : "L"},
          {"leaky_slope", leaky_slope}};
}

AladinConfig AladinConfig::from_json(const nlohmann::json& j) {
  AladinConfig c = j.value("variant", "S") == "L" ? large() : small();
  c.style_channels = j.value("style_channels", c.style_channels);
  c.content_channels = j.value("content_channels", c.content_channels);
  c.conv_kernel = j.value("conv_kernel", c.conv_kernel);
  c.conv_stride = j.value("conv_stride", c.conv_stride);
  c.projection_hidden = j.value("projection_hidden", c.projection_hidden);
  c.projection_out = j.value("projection_out", c.projection_out);
  const std::string mode = j.value("adain_mode", "std");
  if (mode != "std" && mode != "variance") throw UsageError("adain_mode must be std|variance");
  c.adain_mode = mode == "std" ? AdainMode::Std : AdainMode::Variance;
  c.leaky_slope = j.value("leaky_slope", c.leaky_slope);
  c.validate();
  return c;
}

std::vector<CodeSegment> style_code_layout(const AladinConfig& cfg) {
  std::vector<CodeSegment> out;
  std::size_t off = 0;
  for (int c : cfg.style_channels) {
    const auto ch = static_cast<std::size_t>(c);
    out.push_back({off, off + ch, ch});
    off += 2 * ch;
  }
  return out;
}

template <class T>
Tensor<T> init_weight(Shape shape, std::size_t fan_in, double slope, Rng& rng) {
  const double bound = std::sqrt(6.0 / ((1.0 + slope * slope) * static_cast<double>(fan_in)));
  Tensor<T> w(std::move(shape));
  for (auto& v : w.data()) v = static_cast<T>(rng.uniform(-bound, bound));
  return w;
}

template <class T>
AladinModel<T>::AladinModel(AladinConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
  cfg_.validate();
  Rng rng(seed);
  const auto k = static_cast<std::size_t>(cfg_.conv_kernel);
  auto add_conv = [&](const std::string& prefix, std::size_t in, std::size_t out) {
    params_.add(prefix + ".weight", init_weight<T>({out, in, k, k}, in * k * k, cfg_.leaky_slope, rng));
    params_.add(prefix + ".bias", Tensor<T>::zeros({out}));
  };
  auto add_fc = [&](const std::string& prefix, std::size_t in, std::size_t out) {
    params_.add(prefix + ".weight", init_weight<T>({out, in}, in, cfg_.leaky_slope, rng));
    params_.add(prefix + ".bias", Tensor<T>::zeros({out}));
  };

  std::size_t in = 3;
  for (std::size_t i = 0; i < cfg_.style_channels.size(); ++i) {
    const auto out = static_cast<std::size_t>(cfg_.style_channels[i]);
    add_conv("style.conv" + std::to_string(i), in, out);
    in = out;
  }
  in = 3;
  for (std::size_t i = 0; i < cfg_.content_channels.size(); ++i) {
    const auto out = static_cast<std::size_t>(cfg_.content_channels[i]);
    add_conv("content.conv" + std::to_string(i), in, out);
    in = out;
  }
  // Decoder layer d carries the channel count of style layer L-1-d.
  in = static_cast<std::size_t>(cfg_.content_channels.back());
  const std::size_t depth = cfg_.style_channels.size();
  for (std::size_t d = 0; d < depth; ++d) {
    const auto out = static_cast<std::size_t>(cfg_.style_channels[depth - 1 - d]);
    add_conv("decoder.conv" + std::to_string(d), in, out);
    in = out;
  }
  add_conv("decoder.out", in, 3);
  add_fc("proj.fc1", cfg_.style_code_dim(), static_cast<std::size_t>(cfg_.projection_hidden));
  add_fc("proj.fc2", static_cast<std::size_t>(cfg_.projection_hidden),
         static_cast<std::size_t>(cfg_.projection_out));
}

template <class T>
Var<T> AladinModel<T>::conv_block(const Var<T>& x, const std::string& prefix, int stride) {
  auto* ctx = x.context();
  auto y = conv2d(x, ctx->param(params_.get(prefix + ".weight")), stride, cfg_.conv_kernel / 2);
  return bias_add(y, ctx->param(params_.get(prefix + ".bias")));
}

namespace {

void check_image_batch(const Shape& s, std::size_t multiple, std::size_t depth, const char* who) {
  if (s.size() != 4 || s[1] != 3) {
    throw DimensionError(std::string(who) + ": expected [N,3,H,W], got " + shape_string(s));
  }
  std::size_t m = 1;
  for (std::size_t i = 0; i < depth; ++i) m *= multiple;
  if (s[2] % m != 0 || s[3] % m != 0) {
    throw DimensionError(std::string(who) + ": spatial size " + shape_string(s) +
                         " not divisible by " + std::to_string(m));
  }
}

}  // namespace

template <class T>
StyleEncoding<T> AladinModel<T>::encode_style(const Var<T>& images) {
  check_image_batch(images.shape(), static_cast<std::size_t>(cfg_.conv_stride),
                    cfg_.style_channels.size(), "encode_style");
  StyleEncoding<T> enc;
  std::vector<Var<T>> pieces;
  Var<T> h = images;
  for (std::size_t i = 0; i < cfg_.style_channels.size(); ++i) {
    h = leaky_relu(conv_block(h, "style.conv" + std::to_string(i), cfg_.conv_stride),
                   cfg_.leaky_slope);
    auto [m, v] = channel_stats(h);
    enc.activations.push_back(h);
    enc.means.push_back(m);
    enc.vars.push_back(v);
    pieces.push_back(m);
    pieces.push_back(v);
  }
  enc.code = concat_cols(pieces);
  return enc;
}

template <class T>
Var<T> AladinModel<T>::encode_content(const Var<T>& images) {
  check_image_batch(images.shape(), static_cast<std::size_t>(cfg_.conv_stride),
                    cfg_.content_channels.size(), "encode_content");
  Var<T> h = images;
  for (std::size_t i = 0; i < cfg_.content_channels.size(); ++i) {
    h = conv_block(h, "content.conv" + std::to_string(i), cfg_.conv_stride);
    h = leaky_relu(instance_norm(h), cfg_.leaky_slope);
  }
  return h;
}

template <class T>
Var<T> AladinModel<T>::decode(const Var<T>& content, const Var<T>& style_code) {
  const std::size_t code_dim = cfg_.style_code_dim();
  if (style_code.shape().size() != 2 || style_code.dim(1) != code_dim) {
    throw DimensionError("decode: style code must be [N," + std::to_string(code_dim) + "], got " +
                         shape_string(style_code.shape()));
  }
  const auto expected_c = static_cast<std::size_t>(cfg_.content_channels.back());
  if (content.shape().size() != 4 || content.dim(1) != expected_c ||
      content.dim(0) != style_code.dim(0)) {
    throw DimensionError("decode: content features " + shape_string(content.shape()) +
                         " incompatible with config");
  }
  const auto layout = style_code_layout(cfg_);
  const std::size_t depth = layout.size();
  const std::size_t ups = cfg_.content_channels.size();
  Var<T> h = content;
  for (std::size_t d = 0; d < depth; ++d) {
    if (d < ups) h = upsample_nearest(h, cfg_.conv_stride);
    h = conv_block(h, "decoder.conv" + std::to_string(d), 1);
    const CodeSegment& seg = layout[depth - 1 - d];
    auto m = slice_cols(style_code, seg.mean_offset, seg.channels);
    auto v = slice_cols(style_code, seg.var_offset, seg.channels);
    h = leaky_relu(adain(h, m, v, cfg_.adain_mode), cfg_.leaky_slope);
  }
  if (ups > depth) {
    int factor = 1;
    for (std::size_t i = depth; i < ups; ++i) factor *= cfg_.conv_stride;
    h = upsample_nearest(h, factor);
  }
  return conv_block(h, "decoder.out", 1);
}

template <class T>
Var<T> AladinModel<T>::project(const Var<T>& style_code) {
  auto* ctx = style_code.context();
  auto fc = [&](const Var<T>& x, const std::string& prefix) {
    return bias_add(linear(x, ctx->param(params_.get(prefix + ".weight"))),
                    ctx->param(params_.get(prefix + ".bias")));
  };
  auto hidden = leaky_relu(fc(style_code, "proj.fc1"), cfg_.leaky_slope);
  return l2_normalize_rows(fc(hidden, "proj.fc2"));
}

template <class T>
ForwardResult<T> AladinModel<T>::forward(const Var<T>& images, const ForwardRequest& request) {
  ForwardResult<T> out;
  StyleEncoding<T> style = encode_style(images);
  if (request.embedding) {
    out.embedding = request.use_projection ? project(style.code) : l2_normalize_rows(style.code);
  }
  if (request.reconstruction) out.reconstruction = decode(encode_content(images), style.code);
  return out;
}

template <class T>
Tensor<T> AladinModel<T>::retrieval_embedding(const Tensor<T>& images) {
  constexpr std::size_t kChunk = 32;
  std::vector<Tensor<T>> parts;
  for (std::size_t b = 0; b < images.dim(0); b += kChunk) {
    GradContext<T> ctx(GradContext<T>::Mode::NoGrad);
    auto x = ctx.constant(slice_rows(images, b, std::min(images.dim(0), b + kChunk)));
    parts.push_back(encode_style(x).code.value());
  }
  return concat_rows<T>(parts);
}

template class AladinModel<float>;
template class AladinModel<double>;
template Tensor<float> init_weight<float>(Shape, std::size_t, double, Rng&);
template Tensor<double> init_weight<double>(Shape, std::size_t, double, Rng&);

}  // namespace aladin
