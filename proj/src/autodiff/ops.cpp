// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#include "aladin/autodiff/ops.hpp"

#include <Eigen/Core>
#include <cmath>
#include <string>

namespace aladin {
namespace {

template <class T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using MatMap = Eigen::Map<RowMat<T>>;
template <class T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;
template <class T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <class T>
GradContext<T>* context_of(std::initializer_list<const Var<T>*> vars) {
  GradContext<T>* ctx = nullptr;
  for (const auto* v : vars) {
    if (!v->valid()) throw UsageError("use of an empty Var");
    if (!ctx) ctx = v->context();
    if (v->context() != ctx) throw UsageError("operands belong to different GradContexts");
  }
  return ctx;
}

void require_rank(const Shape& s, std::size_t rank, const char* op) {
  if (s.size() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) +
                         ", got shape " + shape_string(s));
  }
}

// Mean and population variance of a contiguous plane. Every op that needs
// channel statistics goes through this so results agree bit-for-bit.
template <class T>
void plane_stats(const T* p, std::size_t m, T& mu, T& var) {
  T s = 0;
  for (std::size_t i = 0; i < m; ++i) s += p[i];
  mu = s / static_cast<T>(m);
  T q = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const T d = p[i] - mu;
    q += d * d;
  }
  var = q / static_cast<T>(m);
}

struct ConvGeom {
  std::size_t n, c, h, w, f, k, ho, wo;
  int stride, pad;
};

template <class T>
void im2col(const T* x, const ConvGeom& g, T* col) {
  const std::size_t hw_out = g.ho * g.wo;
  for (std::size_t c = 0; c < g.c; ++c) {
    const T* plane = x + c * g.h * g.w;
    for (std::size_t ki = 0; ki < g.k; ++ki) {
      for (std::size_t kj = 0; kj < g.k; ++kj) {
        T* dst = col + ((c * g.k + ki) * g.k + kj) * hw_out;
        for (std::size_t oh = 0; oh < g.ho; ++oh) {
          const long ih = static_cast<long>(oh) * g.stride - g.pad + static_cast<long>(ki);
          T* drow = dst + oh * g.wo;
          if (ih < 0 || ih >= static_cast<long>(g.h)) {
            std::fill(drow, drow + g.wo, T(0));
            continue;
          }
          const T* srow = plane + static_cast<std::size_t>(ih) * g.w;
          for (std::size_t ow = 0; ow < g.wo; ++ow) {
            const long iw = static_cast<long>(ow) * g.stride - g.pad + static_cast<long>(kj);
            drow[ow] = (iw < 0 || iw >= static_cast<long>(g.w)) ? T(0)
                                                                 : srow[static_cast<std::size_t>(iw)];
          }
        }
      }
    }
  }
}

template <class T>
void col2im_add(const T* col, const ConvGeom& g, T* dx) {
  const std::size_t hw_out = g.ho * g.wo;
  for (std::size_t c = 0; c < g.c; ++c) {
    T* plane = dx + c * g.h * g.w;
    for (std::size_t ki = 0; ki < g.k; ++ki) {
      for (std::size_t kj = 0; kj < g.k; ++kj) {
        const T* src = col + ((c * g.k + ki) * g.k + kj) * hw_out;
        for (std::size_t oh = 0; oh < g.ho; ++oh) {
          const long ih = static_cast<long>(oh) * g.stride - g.pad + static_cast<long>(ki);
          if (ih < 0 || ih >= static_cast<long>(g.h)) continue;
          T* drow = plane + static_cast<std::size_t>(ih) * g.w;
          const T* srow = src + oh * g.wo;
          for (std::size_t ow = 0; ow < g.wo; ++ow) {
            const long iw = static_cast<long>(ow) * g.stride - g.pad + static_cast<long>(kj);
            if (iw < 0 || iw >= static_cast<long>(g.w)) continue;
            drow[static_cast<std::size_t>(iw)] += srow[ow];
          }
        }
      }
    }
  }
}

}  // namespace

template <class T>
Var<T> conv2d(const Var<T>& input, const Var<T>& weight, int stride, int padding) {
  auto* ctx = context_of<T>({&input, &weight});
  const Shape& xs = input.shape();
  const Shape& ws = weight.shape();
  require_rank(xs, 4, "conv2d input");
  require_rank(ws, 4, "conv2d weight");
  if (ws[1] != xs[1]) {
    throw DimensionError("conv2d: weight expects " + std::to_string(ws[1]) +
                         " input channels, input has " + std::to_string(xs[1]));
  }
  if (ws[2] != ws[3] || ws[2] % 2 == 0) throw DimensionError("conv2d: kernel must be odd and square");
  if (stride < 1 || padding < 0) throw UsageError("conv2d: stride >= 1 and padding >= 0 required");
  const long hp = static_cast<long>(xs[2]) + 2L * padding - static_cast<long>(ws[2]);
  const long wp = static_cast<long>(xs[3]) + 2L * padding - static_cast<long>(ws[3]);
  if (hp < 0 || wp < 0) throw DimensionError("conv2d: kernel larger than padded input");

  ConvGeom g{xs[0], xs[1], xs[2], xs[3], ws[0], ws[2],
             static_cast<std::size_t>(hp / stride + 1), static_cast<std::size_t>(wp / stride + 1),
             stride, padding};
  const std::size_t ckk = g.c * g.k * g.k;
  const std::size_t hw_out = g.ho * g.wo;

  Tensor<T> out({g.n, g.f, g.ho, g.wo});
  std::vector<T> col(ckk * hw_out);
  ConstMatMap<T> wmat(weight.value().raw(), g.f, ckk);
  for (std::size_t n = 0; n < g.n; ++n) {
    im2col(input.value().raw() + n * g.c * g.h * g.w, g, col.data());
    ConstMatMap<T> cmat(col.data(), ckk, hw_out);
    MatMap<T> omat(out.raw() + n * g.f * hw_out, g.f, hw_out);
    omat.noalias() = wmat * cmat;
  }

  return ctx->make(std::move(out), {input, weight}, [g, ckk, hw_out](const BackwardArgs<T>& a) {
    const T* x = a.in[0]->raw();
    ConstMatMap<T> wmat(a.in[1]->raw(), g.f, ckk);
    std::vector<T> col(ckk * hw_out);
    for (std::size_t n = 0; n < g.n; ++n) {
      ConstMatMap<T> gout(a.grad_out.raw() + n * g.f * hw_out, g.f, hw_out);
      if (a.grad_in[1]) {
        im2col(x + n * g.c * g.h * g.w, g, col.data());
        ConstMatMap<T> cmat(col.data(), ckk, hw_out);
        MatMap<T> gw(a.grad_in[1]->raw(), g.f, ckk);
        gw.noalias() += gout * cmat.transpose();
      }
      if (a.grad_in[0]) {
        MatMap<T> dcol(col.data(), ckk, hw_out);
        dcol.noalias() = wmat.transpose() * gout;
        col2im_add(col.data(), g, a.grad_in[0]->raw() + n * g.c * g.h * g.w);
      }
    }
  }, "conv2d");
}

template <class T>
Var<T> bias_add(const Var<T>& x, const Var<T>& bias) {
  auto* ctx = context_of<T>({&x, &bias});
  const Shape& xs = x.shape();
  if (xs.size() != 2 && xs.size() != 4) throw DimensionError("bias_add: rank 2 or 4 expected");
  require_rank(bias.shape(), 1, "bias_add bias");
  if (bias.dim(0) != xs[1]) throw DimensionError("bias_add: bias length mismatch");
  const std::size_t n = xs[0], c = xs[1];
  const std::size_t inner = xs.size() == 4 ? xs[2] * xs[3] : 1;
  Tensor<T> out = x.value();
  const T* b = bias.value().raw();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t ch = 0; ch < c; ++ch) {
      T* p = out.raw() + (i * c + ch) * inner;
      for (std::size_t j = 0; j < inner; ++j) p[j] += b[ch];
    }
  return ctx->make(std::move(out), {x, bias}, [n, c, inner](const BackwardArgs<T>& a) {
    const T* g = a.grad_out.raw();
    if (a.grad_in[0]) {
      T* dx = a.grad_in[0]->raw();
      for (std::size_t i = 0; i < n * c * inner; ++i) dx[i] += g[i];
    }
    if (a.grad_in[1]) {
      T* db = a.grad_in[1]->raw();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t ch = 0; ch < c; ++ch) {
          const T* p = g + (i * c + ch) * inner;
          T s = 0;
          for (std::size_t j = 0; j < inner; ++j) s += p[j];
          db[ch] += s;
        }
    }
  }, "bias_add");
}

template <class T>
Var<T> instance_norm(const Var<T>& x, double eps) {
  auto* ctx = context_of<T>({&x});
  require_rank(x.shape(), 4, "instance_norm");
  const std::size_t planes = x.dim(0) * x.dim(1);
  const std::size_t m = x.dim(2) * x.dim(3);
  if (m == 0) throw DimensionError("instance_norm: empty spatial extent");
  Tensor<T> out(x.shape());
  std::vector<T> inv(planes);
  for (std::size_t p = 0; p < planes; ++p) {
    const T* src = x.value().raw() + p * m;
    T mu, var;
    plane_stats(src, m, mu, var);
    inv[p] = T(1) / std::sqrt(var + static_cast<T>(eps));
    T* dst = out.raw() + p * m;
    for (std::size_t i = 0; i < m; ++i) dst[i] = (src[i] - mu) * inv[p];
  }
  return ctx->make(std::move(out), {x}, [planes, m, inv](const BackwardArgs<T>& a) {
    if (!a.grad_in[0]) return;
    for (std::size_t p = 0; p < planes; ++p) {
      const T* g = a.grad_out.raw() + p * m;
      const T* xhat = a.out.raw() + p * m;
      T sg = 0, sgx = 0;
      for (std::size_t i = 0; i < m; ++i) {
        sg += g[i];
        sgx += g[i] * xhat[i];
      }
      const T mg = sg / static_cast<T>(m), mgx = sgx / static_cast<T>(m);
      T* dx = a.grad_in[0]->raw() + p * m;
      for (std::size_t i = 0; i < m; ++i) dx[i] += inv[p] * (g[i] - mg - xhat[i] * mgx);
    }
  }, "instance_norm");
}

template <class T>
Var<T> channel_mean(const Var<T>& x) {
  auto* ctx = context_of<T>({&x});
  require_rank(x.shape(), 4, "channel_mean");
  const std::size_t n = x.dim(0), c = x.dim(1), m = x.dim(2) * x.dim(3);
  if (m == 0) throw DimensionError("channel_mean: empty spatial extent");
  Tensor<T> out({n, c});
  for (std::size_t p = 0; p < n * c; ++p) {
    T mu, var;
    plane_stats(x.value().raw() + p * m, m, mu, var);
    out[p] = mu;
  }
  return ctx->make(std::move(out), {x}, [n, c, m](const BackwardArgs<T>& a) {
    if (!a.grad_in[0]) return;
    T* dx = a.grad_in[0]->raw();
    for (std::size_t p = 0; p < n * c; ++p) {
      const T g = a.grad_out[p] / static_cast<T>(m);
      for (std::size_t i = 0; i < m; ++i) dx[p * m + i] += g;
    }
  }, "channel_mean");
}

template <class T>
Var<T> channel_var(const Var<T>& x) {
  auto* ctx = context_of<T>({&x});
  require_rank(x.shape(), 4, "channel_var");
  const std::size_t n = x.dim(0), c = x.dim(1), m = x.dim(2) * x.dim(3);
  if (m == 0) throw DimensionError("channel_var: empty spatial extent");
  Tensor<T> out({n, c});
  for (std::size_t p = 0; p < n * c; ++p) {
    T mu, var;
    plane_stats(x.value().raw() + p * m, m, mu, var);
    out[p] = var;
  }
  return ctx->make(std::move(out), {x}, [n, c, m](const BackwardArgs<T>& a) {
    if (!a.grad_in[0]) return;
    const T* x = a.in[0]->raw();
    T* dx = a.grad_in[0]->raw();
    for (std::size_t p = 0; p < n * c; ++p) {
      T mu, var;
      plane_stats(x + p * m, m, mu, var);
      const T g = T(2) * a.grad_out[p] / static_cast<T>(m);
      for (std::size_t i = 0; i < m; ++i) dx[p * m + i] += g * (x[p * m + i] - mu);
    }
  }, "channel_var");
}

template <class T>
Var<T> adain(const Var<T>& x, const Var<T>& target_mean, const Var<T>& target_var,
             AdainMode mode, double eps_d) {
  auto* ctx = context_of<T>({&x, &target_mean, &target_var});
  require_rank(x.shape(), 4, "adain");
  const std::size_t n = x.dim(0), c = x.dim(1), m = x.dim(2) * x.dim(3);
  const Shape stat_shape{n, c};
  if (target_mean.shape() != stat_shape || target_var.shape() != stat_shape) {
    throw DimensionError("adain: targets must be " + shape_string(stat_shape));
  }
  if (m == 0) throw DimensionError("adain: empty spatial extent");
  const T eps = static_cast<T>(eps_d);
  for (std::size_t p = 0; p < n * c; ++p) {
    if (target_var.value()[p] < T(0)) throw DomainError("adain: negative target variance");
  }
  Tensor<T> out(x.shape());
  std::vector<T> mus(n * c), vars(n * c), gains(n * c);
  for (std::size_t p = 0; p < n * c; ++p) {
    const T* src = x.value().raw() + p * m;
    plane_stats(src, m, mus[p], vars[p]);
    const T vt = target_var.value()[p];
    gains[p] = mode == AdainMode::Std ? std::sqrt((vt + eps) / (vars[p] + eps))
                                      : vt / (vars[p] + eps);
    const T shift = target_mean.value()[p] - gains[p] * mus[p];
    T* dst = out.raw() + p * m;
    for (std::size_t i = 0; i < m; ++i) dst[i] = gains[p] * src[i] + shift;
  }
  return ctx->make(std::move(out), {x, target_mean, target_var},
                   [n, c, m, eps, mode, mus, vars, gains](const BackwardArgs<T>& a) {
    const T* x = a.in[0]->raw();
    const T* vt = a.in[2]->raw();
    for (std::size_t p = 0; p < n * c; ++p) {
      const T* g = a.grad_out.raw() + p * m;
      const T* xp = x + p * m;
      T s1 = 0, s2 = 0;
      for (std::size_t i = 0; i < m; ++i) {
        s1 += g[i];
        s2 += g[i] * (xp[i] - mus[p]);
      }
      T dgain_dvt, dgain_dv;
      if (mode == AdainMode::Std) {
        dgain_dvt = gains[p] / (T(2) * (vt[p] + eps));
        dgain_dv = -gains[p] / (T(2) * (vars[p] + eps));
      } else {
        dgain_dvt = T(1) / (vars[p] + eps);
        dgain_dv = -gains[p] / (vars[p] + eps);
      }
      if (a.grad_in[1]) (*a.grad_in[1])[p] += s1;
      if (a.grad_in[2]) (*a.grad_in[2])[p] += s2 * dgain_dvt;
      if (a.grad_in[0]) {
        T* dx = a.grad_in[0]->raw() + p * m;
        const T mean_g = s1 / static_cast<T>(m);
        const T var_coef = s2 * dgain_dv * T(2) / static_cast<T>(m);
        for (std::size_t i = 0; i < m; ++i) {
          dx[i] += gains[p] * (g[i] - mean_g) + var_coef * (xp[i] - mus[p]);
        }
      }
    }
  }, "adain");
}

template <class T>
Var<T> leaky_relu(const Var<T>& x, double slope_d) {
  auto* ctx = context_of<T>({&x});
  const T slope = static_cast<T>(slope_d);
  Tensor<T> out = x.value();
  for (auto& v : out.data()) v = v > T(0) ? v : slope * v;
  return ctx->make(std::move(out), {x}, [slope](const BackwardArgs<T>& a) {
    if (!a.grad_in[0]) return;
    const T* xv = a.in[0]->raw();
    T* dx = a.grad_in[0]->raw();
    for (std::size_t i = 0; i < a.grad_out.numel(); ++i) {
      dx[i] += xv[i] > T(0) ? a.grad_out[i] : slope * a.grad_out[i];
    }
  }, "leaky_relu");
}

template <class T>
Var<T> upsample_nearest(const Var<T>& x, int factor) {
  auto* ctx = context_of<T>({&x});
  require_rank(x.shape(), 4, "upsample_nearest");
  if (factor < 1) throw UsageError("upsample_nearest: factor must be >= 1");
  const std::size_t f = static_cast<std::size_t>(factor);
  const std::size_t planes = x.dim(0) * x.dim(1), h = x.dim(2), w = x.dim(3);
  Tensor<T> out({x.dim(0), x.dim(1), h * f, w * f});
  for (std::size_t p = 0; p < planes; ++p) {
    const T* src = x.value().raw() + p * h * w;
    T* dst = out.raw() + p * h * w * f * f;
    for (std::size_t i = 0; i < h * f; ++i)
      for (std::size_t j = 0; j < w * f; ++j) dst[i * w * f + j] = src[(i / f) * w + j / f];
  }
  return ctx->make(std::move(out), {x}, [planes, h, w, f](const BackwardArgs<T>& a) {
    if (!a.grad_in[0]) return;
    for (std::size_t p = 0; p < planes; ++p) {
      const T* g = a.grad_out.raw() + p * h * w * f * f;
      T* dx = a.grad_in[0]->raw() + p * h * w;
      for (std::size_t i = 0; i < h * f; ++i)
        for (std::size_t j = 0; j < w * f; ++j) dx[(i / f) * w + j / f] += g[i * w * f + j];
    }
  }, "upsample_nearest");
}

template <class T>
Var<T> linear(const Var<T>& x, const Var<T>& weight) {
  auto* ctx = context_of<T>({&x, &weight});
  require_rank(x.shape(), 2, "linear input");
  require_rank(weight.shape(), 2, "linear weight");
  const std::size_t n = x.dim(0), in = x.dim(1), out_dim = weight.dim(0);
  if (weight.dim(1) != in) {
    throw DimensionError("linear: weight " + shape_string(weight.shape()) + " vs input " +
                         shape_string(x.shape()));
  }
  Tensor<T> out({n, out_dim});
  ConstMatMap<T> wmat(weight.value().raw(), out_dim, in);
  // Row-at-a-time so each sample's result is independent of the batch.
  for (std::size_t r = 0; r < n; ++r) {
    Eigen::Map<const Vec<T>> xr(x.value().raw() + r * in, in);
    Eigen::Map<Vec<T>> yr(out.raw() + r * out_dim, out_dim);
    yr.noalias() = wmat * xr;
  }
  return ctx->make(std::move(out), {x, weight}, [n, in, out_dim](const BackwardArgs<T>& a) {
    ConstMatMap<T> g(a.grad_out.raw(), n, out_dim);
    if (a.grad_in[0]) {
      ConstMatMap<T> wmat(a.in[1]->raw(), out_dim, in);
      MatMap<T> dx(a.grad_in[0]->raw(), n, in);
      dx.noalias() += g * wmat;
    }
    if (a.grad_in[1]) {
      ConstMatMap<T> xm(a.in[0]->raw(), n, in);
      MatMap<T> dw(a.grad_in[1]->raw(), out_dim, in);
      dw.noalias() += g.transpose() * xm;
    }
  }, "linear");
}

template <class T>
Var<T> l2_normalize_rows(const Var<T>& x, double eps_d) {
  auto* ctx = context_of<T>({&x});
  require_rank(x.shape(), 2, "l2_normalize_rows");
  const std::size_t n = x.dim(0), d = x.dim(1);
  const T eps2 = static_cast<T>(eps_d * eps_d);
  Tensor<T> out(x.shape());
  std::vector<T> norms(n);
  for (std::size_t r = 0; r < n; ++r) {
    const T* src = x.value().raw() + r * d;
    T s = 0;
    for (std::size_t j = 0; j < d; ++j) s += src[j] * src[j];
    norms[r] = std::sqrt(s + eps2);
    for (std::size_t j = 0; j < d; ++j) out[r * d + j] = src[j] / norms[r];
  }
  return ctx->make(std::move(out), {x}, [n, d, norms](const BackwardArgs<T>& a) {
    if (!a.grad_in[0]) return;
    for (std::size_t r = 0; r < n; ++r) {
      const T* g = a.grad_out.raw() + r * d;
      const T* y = a.out.raw() + r * d;
      T yg = 0;
      for (std::size_t j = 0; j < d; ++j) yg += y[j] * g[j];
      T* dx = a.grad_in[0]->raw() + r * d;
      for (std::size_t j = 0; j < d; ++j) dx[j] += (g[j] - y[j] * yg) / norms[r];
    }
  }, "l2_normalize_rows");
}

template <class T>
Var<T> concat_cols(const std::vector<Var<T>>& parts) {
  if (parts.empty()) throw DimensionError("concat_cols of nothing");
  GradContext<T>* ctx = parts[0].context();
  const std::size_t n = parts[0].shape().at(0);
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    require_rank(p.shape(), 2, "concat_cols");
    if (p.context() != ctx) throw UsageError("concat_cols: mixed contexts");
    if (p.dim(0) != n) throw DimensionError("concat_cols: row counts differ");
    widths.push_back(p.dim(1));
    total += p.dim(1);
  }
  Tensor<T> out({n, total});
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < parts.size(); ++k) {
      const T* src = parts[k].value().raw() + r * widths[k];
      std::copy(src, src + widths[k], out.raw() + r * total + off);
      off += widths[k];
    }
  }
  return ctx->make(std::move(out), parts, [n, total, widths](const BackwardArgs<T>& a) {
    for (std::size_t r = 0; r < n; ++r) {
      std::size_t off = 0;
      for (std::size_t k = 0; k < widths.size(); ++k) {
        if (a.grad_in[k]) {
          const T* g = a.grad_out.raw() + r * total + off;
          T* dst = a.grad_in[k]->raw() + r * widths[k];
          for (std::size_t j = 0; j < widths[k]; ++j) dst[j] += g[j];
        }
        off += widths[k];
      }
    }
  }, "concat_cols");
}

template <class T>
Var<T> slice_cols(const Var<T>& x, std::size_t begin, std::size_t count) {
  auto* ctx = context_of<T>({&x});
  require_rank(x.shape(), 2, "slice_cols");
  const std::size_t n = x.dim(0), d = x.dim(1);
  if (begin + count > d) throw DimensionError("slice_cols: range exceeds width");
  Tensor<T> out({n, count});
  for (std::size_t r = 0; r < n; ++r) {
    const T* src = x.value().raw() + r * d + begin;
    std::copy(src, src + count, out.raw() + r * count);
  }
  return ctx->make(std::move(out), {x}, [n, d, begin, count](const BackwardArgs<T>& a) {
    if (!a.grad_in[0]) return;
    for (std::size_t r = 0; r < n; ++r) {
      const T* g = a.grad_out.raw() + r * count;
      T* dst = a.grad_in[0]->raw() + r * d + begin;
      for (std::size_t j = 0; j < count; ++j) dst[j] += g[j];
    }
  }, "slice_cols");
}

template <class T>
Var<T> gather_rows(const Var<T>& x, const std::vector<std::size_t>& rows) {
  auto* ctx = context_of<T>({&x});
  if (x.shape().empty()) throw DimensionError("gather_rows on a scalar");
  const std::size_t n = x.dim(0);
  const std::size_t width = x.value().numel() / std::max<std::size_t>(n, 1);
  Shape shape = x.shape();
  shape[0] = rows.size();
  Tensor<T> out(shape);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= n) throw DimensionError("gather_rows: index out of range");
    std::copy(x.value().raw() + rows[i] * width, x.value().raw() + (rows[i] + 1) * width,
              out.raw() + i * width);
  }
  return ctx->make(std::move(out), {x}, [rows, width](const BackwardArgs<T>& a) {
    if (!a.grad_in[0]) return;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const T* g = a.grad_out.raw() + i * width;
      T* dst = a.grad_in[0]->raw() + rows[i] * width;
      for (std::size_t j = 0; j < width; ++j) dst[j] += g[j];
    }
  }, "gather_rows");
}

template <class T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  auto* ctx = context_of<T>({&a, &b});
  a.value().check_same_shape(b.value(), "add");
  Tensor<T> out = a.value();
  out.add_inplace(b.value());
  return ctx->make(std::move(out), {a, b}, [](const BackwardArgs<T>& g) {
    if (g.grad_in[0]) g.grad_in[0]->add_inplace(g.grad_out);
    if (g.grad_in[1]) g.grad_in[1]->add_inplace(g.grad_out);
  }, "add");
}

template <class T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  auto* ctx = context_of<T>({&a, &b});
  a.value().check_same_shape(b.value(), "sub");
  Tensor<T> out = a.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] -= b.value()[i];
  return ctx->make(std::move(out), {a, b}, [](const BackwardArgs<T>& g) {
    if (g.grad_in[0]) g.grad_in[0]->add_inplace(g.grad_out);
    if (g.grad_in[1]) {
      for (std::size_t i = 0; i < g.grad_out.numel(); ++i) (*g.grad_in[1])[i] -= g.grad_out[i];
    }
  }, "sub");
}

template <class T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  auto* ctx = context_of<T>({&a, &b});
  a.value().check_same_shape(b.value(), "mul");
  Tensor<T> out = a.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= b.value()[i];
  return ctx->make(std::move(out), {a, b}, [](const BackwardArgs<T>& g) {
    for (std::size_t i = 0; i < g.grad_out.numel(); ++i) {
      if (g.grad_in[0]) (*g.grad_in[0])[i] += g.grad_out[i] * (*g.in[1])[i];
      if (g.grad_in[1]) (*g.grad_in[1])[i] += g.grad_out[i] * (*g.in[0])[i];
    }
  }, "mul");
}

template <class T>
Var<T> scale(const Var<T>& a, double factor) {
  auto* ctx = context_of<T>({&a});
  const T f = static_cast<T>(factor);
  Tensor<T> out = a.value();
  for (auto& v : out.data()) v *= f;
  return ctx->make(std::move(out), {a}, [f](const BackwardArgs<T>& g) {
    if (!g.grad_in[0]) return;
    for (std::size_t i = 0; i < g.grad_out.numel(); ++i) (*g.grad_in[0])[i] += f * g.grad_out[i];
  }, "scale");
}

template <class T>
Var<T> sum(const Var<T>& a) {
  auto* ctx = context_of<T>({&a});
  T s = 0;
  for (T v : a.value().data()) s += v;
  return ctx->make(Tensor<T>({1}, std::vector<T>{s}), {a}, [](const BackwardArgs<T>& g) {
    if (!g.grad_in[0]) return;
    const T v = g.grad_out[0];
    for (auto& d : g.grad_in[0]->data()) d += v;
  }, "sum");
}

template <class T>
Var<T> mean(const Var<T>& a) {
  auto* ctx = context_of<T>({&a});
  const std::size_t n = a.value().numel();
  if (n == 0) throw DimensionError("mean of an empty tensor");
  T s = 0;
  for (T v : a.value().data()) s += v;
  return ctx->make(Tensor<T>({1}, std::vector<T>{s / static_cast<T>(n)}), {a},
                   [n](const BackwardArgs<T>& g) {
    if (!g.grad_in[0]) return;
    const T v = g.grad_out[0] / static_cast<T>(n);
    for (auto& d : g.grad_in[0]->data()) d += v;
  }, "mean");
}

#define ALADIN_INSTANTIATE_OPS(T)                                                      \
  template Var<T> conv2d(const Var<T>&, const Var<T>&, int, int);                      \
  template Var<T> bias_add(const Var<T>&, const Var<T>&);                              \
  template Var<T> instance_norm(const Var<T>&, double);                                \
  template Var<T> channel_mean(const Var<T>&);                                         \
  template Var<T> channel_var(const Var<T>&);                                          \
  template Var<T> adain(const Var<T>&, const Var<T>&, const Var<T>&, AdainMode, double); \
  template Var<T> leaky_relu(const Var<T>&, double);                                   \
  template Var<T> upsample_nearest(const Var<T>&, int);                                \
  template Var<T> linear(const Var<T>&, const Var<T>&);                                \
  template Var<T> l2_normalize_rows(const Var<T>&, double);                            \
  template Var<T> concat_cols(const std::vector<Var<T>>&);                             \
  template Var<T> slice_cols(const Var<T>&, std::size_t, std::size_t);                 \
  template Var<T> gather_rows(const Var<T>&, const std::vector<std::size_t>&);         \
  template Var<T> add(const Var<T>&, const Var<T>&);                                   \
  template Var<T> sub(const Var<T>&, const Var<T>&);                                   \
  template Var<T> mul(const Var<T>&, const Var<T>&);                                   \
  template Var<T> scale(const Var<T>&, double);                                        \
  template Var<T> sum(const Var<T>&);                                                  \
  template Var<T> mean(const Var<T>&);

ALADIN_INSTANTIATE_OPS(float)
ALADIN_INSTANTIATE_OPS(double)

#undef ALADIN_INSTANTIATE_OPS

}  // namespace aladin
