// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#include "aladin/train/augment.hpp"

#include <algorithm>
#include <cmath>

#include "aladin/core/errors.hpp"

namespace aladin {

bool AugmentParams::is_identity() const {
  return crop_scale == 1.0 && !flip && jitter == std::array<double, 3>{1.0, 1.0, 1.0};
}

AugmentParams draw_augment(Rng& rng) {
  AugmentParams p;
  p.crop_scale = rng.uniform(0.6, 1.0);
  p.crop_x = rng.uniform();
  p.crop_y = rng.uniform();
  p.flip = rng.bernoulli(0.5);
  for (auto& j : p.jitter) j = rng.uniform(0.8, 1.2);
  return p;
}

template <class T>
Tensor<T> augment(const Tensor<T>& image, const AugmentParams& p) {
  if (image.rank() != 3 || image.dim(0) != 3) {
    throw DimensionError("augment: expected [3,H,W], got " + shape_string(image.shape()));
  }
  if (!(p.crop_scale > 0 && p.crop_scale <= 1)) throw UsageError("augment: crop_scale in (0,1]");
  const std::size_t h = image.dim(1), w = image.dim(2);
  const double side = std::sqrt(p.crop_scale);
  const double cw = side * double(w), ch = side * double(h);
  const double x0 = p.crop_x * (double(w) - cw), y0 = p.crop_y * (double(h) - ch);
  const double sx = cw / double(w), sy = ch / double(h);

  Tensor<T> out(image.shape());
  for (std::size_t c = 0; c < 3; ++c) {
    const T* src = image.raw() + c * h * w;
    T* dst = out.raw() + c * h * w;
    const double gain = p.jitter[c];
    for (std::size_t v = 0; v < h; ++v) {
      const double fy = std::clamp(y0 + (double(v) + 0.5) * sy - 0.5, 0.0, double(h - 1));
      const auto iy = static_cast<std::size_t>(fy);
      const std::size_t iy1 = std::min(iy + 1, h - 1);
      const double ty = fy - double(iy);
      for (std::size_t u = 0; u < w; ++u) {
        const double fx = std::clamp(x0 + (double(u) + 0.5) * sx - 0.5, 0.0, double(w - 1));
        const auto ix = static_cast<std::size_t>(fx);
        const std::size_t ix1 = std::min(ix + 1, w - 1);
        const double tx = fx - double(ix);
        double val = src[iy * w + ix];
        if (tx != 0 || ty != 0) {
          val = (1 - ty) * ((1 - tx) * src[iy * w + ix] + tx * src[iy * w + ix1]) +
                ty * ((1 - tx) * src[iy1 * w + ix] + tx * src[iy1 * w + ix1]);
        }
        if (gain != 1.0) val = std::clamp(val * gain, 0.0, 1.0);
        dst[v * w + (p.flip ? w - 1 - u : u)] = static_cast<T>(val);
      }
    }
  }
  return out;
}

template <class T>
void augment_batch(Tensor<T>& images, Rng& rng) {
  if (images.rank() != 4) throw DimensionError("augment_batch: expected [N,3,H,W]");
  const std::size_t per = images.numel() / images.dim(0);
  const Shape one(images.shape().begin() + 1, images.shape().end());
  for (std::size_t n = 0; n < images.dim(0); ++n) {
    Tensor<T> img(one, std::vector<T>(images.raw() + n * per, images.raw() + (n + 1) * per));
    const Tensor<T> a = augment(img, draw_augment(rng));
    std::copy(a.data().begin(), a.data().end(), images.raw() + n * per);
  }
}

template Tensor<float> augment(const Tensor<float>&, const AugmentParams&);
template Tensor<double> augment(const Tensor<double>&, const AugmentParams&);
template void augment_batch(Tensor<float>&, Rng&);
template void augment_batch(Tensor<double>&, Rng&);

}  // namespace aladin
