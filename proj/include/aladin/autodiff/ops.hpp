// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "aladin/autodiff/graph.hpp"

namespace aladin {

inline constexpr double kNormEps = 1e-5;

// ---------------------------------------------------------------------------
// Convolution and normalization. Feature maps are [N, C, H, W].
// ---------------------------------------------------------------------------

// Cross-correlation with an odd square kernel. weight is [F, C, k, k].
template <class T>
Var<T> conv2d(const Var<T>& input, const Var<T>& weight, int stride, int padding);

// Adds bias[c] along dimension 1 of a rank-2 or rank-4 tensor.
template <class T>
Var<T> bias_add(const Var<T>& x, const Var<T>& bias);

template <class T>
Var<T> instance_norm(const Var<T>& x, double eps = kNormEps);

// Population mean and variance over H*W, per sample and channel -> [N, C].
template <class T>
Var<T> channel_mean(const Var<T>& x);
template <class T>
Var<T> channel_var(const Var<T>& x);

template <class T>
std::pair<Var<T>, Var<T>> channel_stats(const Var<T>& x) {
  return {channel_mean(x), channel_var(x)};
}

enum class AdainMode { Std, Variance };

/// Re-normalizes x so that each channel takes the target statistics.
///
/// Std mode:      out = sqrt((v_t + eps) / (v + eps)) * (x - mu) + m_t
/// Variance mode: out = v_t / (v + eps) * (x - mu) + m_t
///
/// where (mu, v) are x's own channel statistics. Computed in the affine form
/// gain * x + (m_t - gain * mu) so that targets equal to x's own statistics
/// (with eps = 0) reproduce x exactly. target_var must be >= 0.
template <class T>
Var<T> adain(const Var<T>& x, const Var<T>& target_mean, const Var<T>& target_var,
             AdainMode mode, double eps = kNormEps);

template <class T>
Var<T> leaky_relu(const Var<T>& x, double slope = 0.2);

template <class T>
Var<T> upsample_nearest(const Var<T>& x, int factor);

// ---------------------------------------------------------------------------
// Dense ops. Matrices are [rows, cols].
// ---------------------------------------------------------------------------

// x [N, in] times weight^T, weight [out, in] -> [N, out].
template <class T>
Var<T> linear(const Var<T>& x, const Var<T>& weight);

// Each row divided by sqrt(|row|^2 + eps^2).
template <class T>
Var<T> l2_normalize_rows(const Var<T>& x, double eps = 1e-12);

template <class T>
Var<T> concat_cols(const std::vector<Var<T>>& parts);

template <class T>
Var<T> slice_cols(const Var<T>& x, std::size_t begin, std::size_t count);

template <class T>
Var<T> gather_rows(const Var<T>& x, const std::vector<std::size_t>& rows);

// Elementwise, identical shapes.
template <class T>
Var<T> add(const Var<T>& a, const Var<T>& b);
template <class T>
Var<T> sub(const Var<T>& a, const Var<T>& b);
template <class T>
Var<T> mul(const Var<T>& a, const Var<T>& b);
template <class T>
Var<T> scale(const Var<T>& a, double factor);

// Reductions to a scalar of shape [1].
template <class T>
Var<T> sum(const Var<T>& a);
template <class T>
Var<T> mean(const Var<T>& a);

}  // namespace aladin
