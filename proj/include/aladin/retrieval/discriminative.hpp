// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "aladin/autodiff/ops.hpp"
#include "aladin/model/trainable.hpp"

namespace aladin {

struct DiscriminativeConfig {
  std::vector<int> channels{32, 64, 128};
  int hidden = 256;
  int embedding = 128;
  double leaky_slope = 0.2;

  void validate() const;
  nlohmann::json to_json() const;
  static DiscriminativeConfig from_json(const nlohmann::json& j);
};

/// Plain conv stack, global average pool, two FC layers. The L2-normalized
/// output of the last FC layer is both the loss and the retrieval embedding.
template <class T>
class DiscriminativeEncoder final : public TrainableModel<T> {
 public:
  DiscriminativeEncoder(DiscriminativeConfig cfg, std::uint64_t seed);

  const DiscriminativeConfig& config() const { return cfg_; }
  Var<T> encode(const Var<T>& images);

  ParameterSet<T>& parameters() override { return params_; }
  ForwardResult<T> forward(const Var<T>& images, const ForwardRequest& request) override;
  Tensor<T> retrieval_embedding(const Tensor<T>& images) override;
  bool supports_reconstruction() const override { return false; }
  std::string kind() const override { return "discriminative"; }
  nlohmann::json config_json() const override { return cfg_.to_json(); }

 private:
  DiscriminativeConfig cfg_;
  ParameterSet<T> params_;
};

}  // namespace aladin
