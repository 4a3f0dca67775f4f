// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "aladin/autodiff/graph.hpp"
#include "json.hpp"

namespace aladin {

struct ForwardRequest {
  bool embedding = true;
  bool reconstruction = false;
  // Loss embedding through the projection head; otherwise the
  // L2-normalized retrieval embedding is used directly.
  bool use_projection = true;
};

template <class T>
struct ForwardResult {
  Var<T> embedding;       // [N, d], unit rows
  Var<T> reconstruction;  // [N, 3, H, W] when requested
};

/// What the training loop and the logit-accumulation engine need from a
/// model. Forward passes are deterministic per sample: a sample's outputs do
/// not depend on which other samples share its batch.
template <class T>
class TrainableModel {
 public:
  virtual ~TrainableModel() = default;

  virtual ParameterSet<T>& parameters() = 0;
  virtual ForwardResult<T> forward(const Var<T>& images, const ForwardRequest& request) = 0;
  // Retrieval vectors for a batch of images, computed without recording.
  virtual Tensor<T> retrieval_embedding(const Tensor<T>& images) = 0;
  virtual bool supports_reconstruction() const = 0;
  // Stochastic layers (dropout and the like) would make the two forwards of
  // logit accumulation disagree; such models must return false.
  virtual bool deterministic_forward() const { return true; }
  virtual std::string kind() const = 0;
  virtual nlohmann::json config_json() const = 0;
};

}  // namespace aladin
