// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#include "aladin/retrieval/discriminative.hpp"

#include "aladin/model/aladin_model.hpp"

namespace aladin {

void DiscriminativeConfig::validate() const {
  if (channels.empty()) throw UsageError("discriminative channels must not be empty");
  for (int c : channels)
    if (c <= 0) throw UsageError("discriminative channels must be positive");
  if (hidden <= 0 || embedding <= 0) throw UsageError("discriminative widths must be positive");
}

nlohmann::json DiscriminativeConfig::to_json() const {
  return {{"channels", channels},
          {"hidden", hidden},
          {"embedding", embedding},
          {"leaky_slope", leaky_slope}};
}

DiscriminativeConfig DiscriminativeConfig::from_json(const nlohmann::json& j) {
  DiscriminativeConfig c;
  c.channels = j.value("channels", c.channels);
  c.hidden = j.value("hidden", c.hidden);
  c.embedding = j.value("embedding", c.embedding);
  c.leaky_slope = j.value("leaky_slope", c.leaky_slope);
  c.validate();
  return c;
}

template <class T>
DiscriminativeEncoder<T>::DiscriminativeEncoder(DiscriminativeConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)) {
  cfg_.validate();
  Rng rng(seed);
  std::size_t in = 3;
  for (std::size_t i = 0; i < cfg_.channels.size(); ++i) {
    const auto out = static_cast<std::size_t>(cfg_.channels[i]);
    const std::string name = "disc.conv" + std::to_string(i);
    params_.add(name + ".weight", init_weight<T>({out, in, 3, 3}, in * 9, cfg_.leaky_slope, rng));
    params_.add(name + ".bias", Tensor<T>::zeros({out}));
    in = out;
  }
  const auto hidden = static_cast<std::size_t>(cfg_.hidden);
  const auto emb = static_cast<std::size_t>(cfg_.embedding);
  params_.add("disc.fc1.weight", init_weight<T>({hidden, in}, in, cfg_.leaky_slope, rng));
  params_.add("disc.fc1.bias", Tensor<T>::zeros({hidden}));
  params_.add("disc.fc2.weight", init_weight<T>({emb, hidden}, hidden, cfg_.leaky_slope, rng));
  params_.add("disc.fc2.bias", Tensor<T>::zeros({emb}));
}

template <class T>
Var<T> DiscriminativeEncoder<T>::encode(const Var<T>& images) {
  if (images.shape().size() != 4 || images.dim(1) != 3) {
    throw DimensionError("discriminative encoder: expected [N,3,H,W], got " +
                         shape_string(images.shape()));
  }
  auto* ctx = images.context();
  auto p = [&](const std::string& name) { return ctx->param(params_.get(name)); };
  Var<T> h = images;
  for (std::size_t i = 0; i < cfg_.channels.size(); ++i) {
    const std::string name = "disc.conv" + std::to_string(i);
    h = leaky_relu(bias_add(conv2d(h, p(name + ".weight"), 2, 1), p(name + ".bias")),
                   cfg_.leaky_slope);
  }
  Var<T> pooled = channel_mean(h);
  Var<T> hidden = leaky_relu(bias_add(linear(pooled, p("disc.fc1.weight")), p("disc.fc1.bias")),
                             cfg_.leaky_slope);
  return l2_normalize_rows(bias_add(linear(hidden, p("disc.fc2.weight")), p("disc.fc2.bias")));
}

template <class T>
ForwardResult<T> DiscriminativeEncoder<T>::forward(const Var<T>& images,
                                                   const ForwardRequest& request) {
  if (request.reconstruction) throw UsageError("discriminative encoder has no decoder");
  ForwardResult<T> out;
  if (request.embedding) out.embedding = encode(images);
  return out;
}

template <class T>
Tensor<T> DiscriminativeEncoder<T>::retrieval_embedding(const Tensor<T>& images) {
  constexpr std::size_t kChunk = 32;
  std::vector<Tensor<T>> parts;
  for (std::size_t b = 0; b < images.dim(0); b += kChunk) {
    GradContext<T> ctx(GradContext<T>::Mode::NoGrad);
    auto x = ctx.constant(slice_rows(images, b, std::min(images.dim(0), b + kChunk)));
    parts.push_back(encode(x).value());
  }
  return concat_rows<T>(parts);
}

template class DiscriminativeEncoder<float>;
template class DiscriminativeEncoder<double>;

}  // namespace aladin
