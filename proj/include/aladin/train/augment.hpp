// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>

#include "aladin/autodiff/tensor.hpp"
#include "aladin/core/rng.hpp"

namespace aladin {

struct AugmentParams {
  double crop_scale = 1.0;  // fraction of the image area kept, in [0.6, 1]
  double crop_x = 0.0;      // offset as a fraction of the free horizontal room
  double crop_y = 0.0;
  bool flip = false;
  std::array<double, 3> jitter{1.0, 1.0, 1.0};  // per-channel gain, in [0.8, 1.2]

  bool is_identity() const;
};

AugmentParams draw_augment(Rng& rng);

// Square random-resized crop with bilinear resampling back to the input size,
// then horizontal flip, then per-channel gain clamped to [0, 1].
// image: [3, H, W]. Exact identity for identity parameters.
template <class T>
Tensor<T> augment(const Tensor<T>& image, const AugmentParams& params);

template <class T>
Tensor<T> augment(const Tensor<T>& image, Rng& rng) {
  return augment(image, draw_augment(rng));
}

// Augments every image of an [N, 3, H, W] batch in place, one draw per image.
template <class T>
void augment_batch(Tensor<T>& images, Rng& rng);

}  // namespace aladin
