// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <vector>

#include "aladin/autodiff/tensor.hpp"

namespace aladin::testing {

inline Tensor<double> unit_rows(Tensor<double> x) {
  const std::size_t d = x.dim(1);
  for (std::size_t i = 0; i < x.dim(0); ++i) {
    double n = 0;
    for (std::size_t k = 0; k < d; ++k) n += x[i * d + k] * x[i * d + k];
    n = std::sqrt(n);
    for (std::size_t k = 0; k < d; ++k) x[i * d + k] /= n;
  }
  return x;
}

inline double dot_row(const Tensor<double>& e, std::size_t i, std::size_t j) {
  double s = 0;
  for (std::size_t k = 0; k < e.dim(1); ++k) s += e[i * e.dim(1) + k] * e[j * e.dim(1) + k];
  return s;
}

// The printed formula, term by term: -log sum_p [exp(s_ip) / sum_n exp(s_in)].
inline double contrastive_oracle(const Tensor<double>& e, const std::vector<int>& g, double tau) {
  double total = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double denom = 0;
    for (std::size_t n = 0; n < g.size(); ++n) {
      if (g[n] != g[i]) denom += std::exp(dot_row(e, i, n) / tau);
    }
    double ratios = 0;
    for (std::size_t p = 0; p < g.size(); ++p) {
      if (p != i && g[p] == g[i]) ratios += std::exp(dot_row(e, i, p) / tau) / denom;
    }
    total += -std::log(ratios);
  }
  return total;
}

}  // namespace aladin::testing
