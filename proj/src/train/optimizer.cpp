// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#include "aladin/train/optimizer.hpp"

#include <cmath>

namespace aladin {

template <class T>
void Adam<T>::step(const std::vector<Parameter<T>*>& params) {
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, double(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, double(t_));
  for (Parameter<T>* p : params) {
    if (!p->has_grad()) continue;
    auto [it, fresh] = state_.try_emplace(p->name);
    Moments& mo = it->second;
    if (fresh) {
      mo.m = Tensor<T>::zeros(p->value.shape());
      mo.v = Tensor<T>::zeros(p->value.shape());
    }
    for (std::size_t i = 0; i < p->value.numel(); ++i) {
      const double g = p->grad[i];
      const double m = cfg_.beta1 * mo.m[i] + (1 - cfg_.beta1) * g;
      const double v = cfg_.beta2 * mo.v[i] + (1 - cfg_.beta2) * g * g;
      mo.m[i] = static_cast<T>(m);
      mo.v[i] = static_cast<T>(v);
      const double update = cfg_.lr * (m / c1) / (std::sqrt(v / c2) + cfg_.eps);
      p->value[i] = static_cast<T>(p->value[i] - update);
    }
  }
}

template class Adam<float>;
template class Adam<double>;

}  // namespace aladin
