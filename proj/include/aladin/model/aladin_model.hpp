// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "aladin/autodiff/ops.hpp"
#include "aladin/core/rng.hpp"
#include "aladin/model/trainable.hpp"

namespace aladin {

enum class Variant { S, L };

struct AladinConfig {
  std::vector<int> style_channels{64, 128, 256};
  std::vector<int> content_channels{32, 64, 128, 128};
  int conv_kernel = 3;
  int conv_stride = 2;
  int projection_hidden = 512;
  int projection_out = 128;
  AdainMode adain_mode = AdainMode::Std;
  Variant variant = Variant::S;
  double leaky_slope = 0.2;

  static AladinConfig small() { return {}; }
  // Deeper style branch standing in for the large backbone.
  static AladinConfig large() {
    AladinConfig c;
    c.style_channels = {64, 128, 256, 512, 512};
    c.variant = Variant::L;
    return c;
  }

  // Two statistics (mean, variance) per style filter.
  std::size_t style_code_dim() const;
  // Input sides must be multiples of this.
  std::size_t spatial_multiple() const;
  void validate() const;

  nlohmann::json to_json() const;
  static AladinConfig from_json(const nlohmann::json& j);
};

// Per-layer [mean | variance] segment boundaries inside a style code.
struct CodeSegment {
  std::size_t mean_offset;
  std::size_t var_offset;
  std::size_t channels;
};
std::vector<CodeSegment> style_code_layout(const AladinConfig& cfg);

template <class T>
struct StyleEncoding {
  Var<T> code;  // [N, style_code_dim], layer-major [mu_1 | var_1 | mu_2 | ...]
  std::vector<Var<T>> means;
  std::vector<Var<T>> vars;
  std::vector<Var<T>> activations;
};

/// Dual-branch encoder-decoder. The style branch yields the search
/// embedding as concatenated per-layer channel statistics; the decoder
/// re-injects each layer's statistics through AdaIN at its mirrored stage.
template <class T>
class AladinModel final : public TrainableModel<T> {
 public:
  AladinModel(AladinConfig cfg, std::uint64_t seed);

  const AladinConfig& config() const { return cfg_; }

  StyleEncoding<T> encode_style(const Var<T>& images);
  Var<T> encode_content(const Var<T>& images);
  Var<T> decode(const Var<T>& content, const Var<T>& style_code);
  Var<T> project(const Var<T>& style_code);

  ParameterSet<T>& parameters() override { return params_; }
  ForwardResult<T> forward(const Var<T>& images, const ForwardRequest& request) override;
  Tensor<T> retrieval_embedding(const Tensor<T>& images) override;
  bool supports_reconstruction() const override { return true; }
  std::string kind() const override { return "aladin"; }
  nlohmann::json config_json() const override { return cfg_.to_json(); }

 private:
  Var<T> conv_block(const Var<T>& x, const std::string& prefix, int stride);

  AladinConfig cfg_;
  ParameterSet<T> params_;
};

// Kaiming-style uniform initialization for a [out, in...] weight.
template <class T>
Tensor<T> init_weight(Shape shape, std::size_t fan_in, double slope, Rng& rng);

}  // namespace aladin
