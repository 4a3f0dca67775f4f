// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#include "aladin/train/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "aladin/autodiff/ops.hpp"
#include "aladin/core/errors.hpp"

namespace aladin {

std::string loss_kind_name(LossKind k) {
  switch (k) {
    case LossKind::Contrastive: return "contrastive";
    case LossKind::Triplet: return "triplet";
    case LossKind::Listwise: return "listwise";
    case LossKind::Softmax: return "softmax";
    case LossKind::ReconstructionOnly: return "recon-only";
  }
  return "?";
}

LossKind parse_loss_kind(const std::string& s) {
  if (s == "contrastive") return LossKind::Contrastive;
  if (s == "triplet") return LossKind::Triplet;
  if (s == "listwise") return LossKind::Listwise;
  if (s == "softmax") return LossKind::Softmax;
  if (s == "recon-only" || s == "reconstruction-only") return LossKind::ReconstructionOnly;
  throw UsageError("unknown loss kind '" + s + "'");
}

void LossConfig::validate() const {
  if (!(tau > 0)) throw UsageError("tau must be > 0");
  if (!(lambda_rec >= 0)) throw UsageError("lambda_rec must be >= 0");
  if (!(margin >= 0)) throw UsageError("margin must be >= 0");
  if (!(listwise_temperature > 0)) throw UsageError("listwise_temperature must be > 0");
}

nlohmann::json LossConfig::to_json() const {
  return {{"kind", loss_kind_name(kind)},
          {"tau", tau},
          {"lambda_rec", lambda_rec},
          {"margin", margin},
          {"use_projection", use_projection},
          {"hard_negatives", hard_negatives},
          {"hn_threshold", hn_threshold},
          {"augmentation", augmentation},
          {"form", form == ContrastiveForm::AsPrinted ? "as-printed" : "supcon"},
          {"listwise_temperature", listwise_temperature}};
}

LossConfig LossConfig::from_json(const nlohmann::json& j) {
  LossConfig c;
  c.kind = parse_loss_kind(j.value("kind", loss_kind_name(c.kind)));
  c.tau = j.value("tau", c.tau);
  c.lambda_rec = j.value("lambda_rec", c.lambda_rec);
  c.margin = j.value("margin", c.margin);
  c.use_projection = j.value("use_projection", c.use_projection);
  c.hard_negatives = j.value("hard_negatives", c.hard_negatives);
  c.hn_threshold = j.value("hn_threshold", c.hn_threshold);
  c.augmentation = j.value("augmentation", c.augmentation);
  const std::string form = j.value("form", "as-printed");
  if (form != "as-printed" && form != "supcon") throw UsageError("form must be as-printed|supcon");
  c.form = form == "supcon" ? ContrastiveForm::SupCon : ContrastiveForm::AsPrinted;
  c.listwise_temperature = j.value("listwise_temperature", c.listwise_temperature);
  c.validate();
  return c;
}

namespace {

constexpr double kUnitTolerance = 1e-3;

template <class T>
GradContext<T>* ctx_of(const Var<T>& v) {
  if (!v.valid()) throw UsageError("use of an empty Var");
  return v.context();
}

void require_matrix(const Shape& s, const char* who) {
  if (s.size() != 2) throw DimensionError(std::string(who) + ": expected a matrix, got " + shape_string(s));
}

// log-sum-exp over the selected entries of s.
double lse(const std::vector<double>& s, const std::vector<std::size_t>& idx) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t j : idx) mx = std::max(mx, s[j]);
  double acc = 0;
  for (std::size_t j : idx) acc += std::exp(s[j] - mx);
  return mx + std::log(acc);
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

template <class T>
Var<T> contrastive_loss(const Var<T>& embeddings, const std::vector<int>& group_ids, double tau,
                        ContrastiveForm form) {
  auto* ctx = ctx_of(embeddings);
  require_matrix(embeddings.shape(), "contrastive_loss");
  if (!(tau > 0)) throw UsageError("contrastive_loss: tau must be > 0");
  const std::size_t b = embeddings.dim(0), d = embeddings.dim(1);
  if (group_ids.size() != b) throw DimensionError("contrastive_loss: one group id per row");
  if (std::set<int>(group_ids.begin(), group_ids.end()).size() < 2) {
    throw UsageError("contrastive_loss: need at least two groups (negatives would be empty)");
  }
  const T* e = embeddings.value().raw();
  for (std::size_t i = 0; i < b; ++i) {
    double n2 = 0;
    for (std::size_t k = 0; k < d; ++k) n2 += double(e[i * d + k]) * e[i * d + k];
    if (std::abs(std::sqrt(n2) - 1.0) > kUnitTolerance) {
      throw UsageError("contrastive_loss: embeddings must be L2-normalized (row " +
                       std::to_string(i) + " has norm " + std::to_string(std::sqrt(n2)) + ")");
    }
  }

  // dL/ds for s_ij = e_i . e_j / tau.
  std::vector<double> ds(b * b, 0.0);
  double total = 0;
  std::vector<double> s(b);
  std::vector<std::size_t> pos, neg, others;
  for (std::size_t i = 0; i < b; ++i) {
    pos.clear();
    neg.clear();
    others.clear();
    for (std::size_t j = 0; j < b; ++j) {
      double dot = 0;
      for (std::size_t k = 0; k < d; ++k) dot += double(e[i * d + k]) * e[j * d + k];
      s[j] = dot / tau;
      if (j == i) continue;
      others.push_back(j);
      (group_ids[j] == group_ids[i] ? pos : neg).push_back(j);
    }
    if (pos.empty()) {
      throw UsageError("contrastive_loss: anchor " + std::to_string(i) + " has no positive");
    }
    double* row = &ds[i * b];
    if (form == ContrastiveForm::AsPrinted) {
      const double lp = lse(s, pos), ln = lse(s, neg);
      total += ln - lp;
      for (std::size_t j : pos) row[j] -= std::exp(s[j] - lp);
      for (std::size_t j : neg) row[j] += std::exp(s[j] - ln);
    } else {
      const double la = lse(s, others);
      const double inv = 1.0 / static_cast<double>(pos.size());
      double mp = 0;
      for (std::size_t j : pos) mp += s[j];
      total += la - mp * inv;
      for (std::size_t j : pos) row[j] -= inv;
      for (std::size_t j : others) row[j] += std::exp(s[j] - la);
    }
  }

  return ctx->make(Tensor<T>({1}, std::vector<T>{static_cast<T>(total)}), {embeddings},
                   [ds = std::move(ds), b, d, tau](const BackwardArgs<T>& g) {
    if (!g.grad_in[0]) return;
    const T* x = g.in[0]->raw();
    T* gx = g.grad_in[0]->raw();
    const double go = g.grad_out[0] / tau;
    for (std::size_t i = 0; i < b; ++i) {
      for (std::size_t j = 0; j < b; ++j) {
        const double w = ds[i * b + j] * go;
        if (w == 0) continue;
        for (std::size_t k = 0; k < d; ++k) {
          gx[i * d + k] += static_cast<T>(w * x[j * d + k]);
          gx[j * d + k] += static_cast<T>(w * x[i * d + k]);
        }
      }
    }
  }, "contrastive_loss");
}

template <class T>
std::vector<double> per_image_l1(const Tensor<T>& decoded, const Tensor<T>& originals) {
  decoded.check_same_shape(originals, "per_image_l1");
  if (decoded.rank() < 1 || decoded.dim(0) == 0) throw DimensionError("per_image_l1: empty batch");
  const std::size_t n = decoded.dim(0), per = decoded.numel() / n;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0;
    for (std::size_t k = 0; k < per; ++k) {
      acc += std::abs(double(decoded[i * per + k]) - double(originals[i * per + k]));
    }
    out[i] = acc / static_cast<double>(per);
  }
  return out;
}

template <class T>
Var<T> reconstruction_loss(const Var<T>& decoded, const Var<T>& originals) {
  auto* ctx = ctx_of(decoded);
  const auto per_image = per_image_l1(decoded.value(), originals.value());
  double total = 0;
  for (double v : per_image) total += v;
  const std::size_t per = decoded.value().numel() / decoded.dim(0);
  return ctx->make(Tensor<T>({1}, std::vector<T>{static_cast<T>(total)}), {decoded, originals},
                   [per](const BackwardArgs<T>& g) {
    const T w = g.grad_out[0] / static_cast<T>(per);
    const Tensor<T>& a = *g.in[0];
    const Tensor<T>& b = *g.in[1];
    for (std::size_t i = 0; i < a.numel(); ++i) {
      const T diff = a[i] - b[i];
      const T sg = diff > 0 ? w : (diff < 0 ? -w : T(0));
      if (g.grad_in[0]) (*g.grad_in[0])[i] += sg;
      if (g.grad_in[1]) (*g.grad_in[1])[i] -= sg;
    }
  }, "reconstruction_loss");
}

template <class T>
Var<T> triplet_loss(const Var<T>& anchor, const Var<T>& positive, const Var<T>& negative,
                    double margin) {
  auto* ctx = ctx_of(anchor);
  require_matrix(anchor.shape(), "triplet_loss");
  anchor.value().check_same_shape(positive.value(), "triplet_loss");
  anchor.value().check_same_shape(negative.value(), "triplet_loss");
  if (!(margin >= 0)) throw UsageError("triplet_loss: margin must be >= 0");
  const std::size_t m = anchor.dim(0), d = anchor.dim(1);
  const T* a = anchor.value().raw();
  const T* p = positive.value().raw();
  const T* n = negative.value().raw();
  // Per row: active flag and the two unit directions (zero at zero distance).
  std::vector<double> dir_ap(m * d, 0.0), dir_np(m * d, 0.0);
  std::vector<char> active(m, 0);
  double total = 0;
  for (std::size_t r = 0; r < m; ++r) {
    double dap = 0, dnp = 0;
    for (std::size_t k = 0; k < d; ++k) {
      const double u = double(a[r * d + k]) - p[r * d + k];
      const double v = double(n[r * d + k]) - p[r * d + k];
      dap += u * u;
      dnp += v * v;
    }
    dap = std::sqrt(dap);
    dnp = std::sqrt(dnp);
    const double h = margin + dap - dnp;
    if (h <= 0) continue;
    total += h;
    active[r] = 1;
    for (std::size_t k = 0; k < d; ++k) {
      if (dap > 0) dir_ap[r * d + k] = (double(a[r * d + k]) - p[r * d + k]) / dap;
      if (dnp > 0) dir_np[r * d + k] = (double(n[r * d + k]) - p[r * d + k]) / dnp;
    }
  }
  return ctx->make(Tensor<T>({1}, std::vector<T>{static_cast<T>(total)}),
                   {anchor, positive, negative},
                   [dir_ap = std::move(dir_ap), dir_np = std::move(dir_np),
                    active = std::move(active), m, d](const BackwardArgs<T>& g) {
    const double go = g.grad_out[0];
    for (std::size_t r = 0; r < m; ++r) {
      if (!active[r]) continue;
      for (std::size_t k = 0; k < d; ++k) {
        const double u = dir_ap[r * d + k] * go, v = dir_np[r * d + k] * go;
        if (g.grad_in[0]) (*g.grad_in[0])[r * d + k] += static_cast<T>(u);
        if (g.grad_in[1]) (*g.grad_in[1])[r * d + k] += static_cast<T>(v - u);
        if (g.grad_in[2]) (*g.grad_in[2])[r * d + k] -= static_cast<T>(v);
      }
    }
  }, "triplet_loss");
}

double smooth_ap(const double* scores, const std::int8_t* relevance, std::size_t n,
                 double temperature, double* grad) {
  if (!(temperature > 0)) throw UsageError("smooth_ap: temperature must be > 0");
  std::size_t num_pos = 0, num_neg = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (relevance[j] == 1) ++num_pos;
    if (relevance[j] == 0) ++num_neg;
  }
  if (num_pos == 0 || num_neg == 0) {
    throw UsageError("smooth_ap: need at least one relevant and one irrelevant item");
  }
  if (grad) std::fill(grad, grad + n, 0.0);
  const double inv_pos = 1.0 / static_cast<double>(num_pos);
  double ap = 0;
  std::vector<double> dsig(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (relevance[i] != 1) continue;
    // Relaxed rank of i among all items and among relevant items.
    double rank_all = 1, rank_pos = 1;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || relevance[j] < 0) continue;
      const double sg = sigmoid((scores[j] - scores[i]) / temperature);
      rank_all += sg;
      if (relevance[j] == 1) rank_pos += sg;
      dsig[j] = sg * (1 - sg) / temperature;
    }
    const double f = rank_pos / rank_all;
    ap += f * inv_pos;
    if (!grad) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || relevance[j] < 0) continue;
      const double df = dsig[j] * ((relevance[j] == 1 ? 1.0 : 0.0) - f) / rank_all * inv_pos;
      grad[j] += df;
      grad[i] -= df;
    }
  }
  return ap;
}

template <class T>
Var<T> listwise_loss(const Var<T>& scores, const std::vector<std::int8_t>& relevance,
                     double temperature) {
  auto* ctx = ctx_of(scores);
  require_matrix(scores.shape(), "listwise_loss");
  const std::size_t q = scores.dim(0), n = scores.dim(1);
  if (relevance.size() != q * n) throw DimensionError("listwise_loss: relevance size mismatch");
  std::vector<double> s(n), grads(q * n);
  double total = 0;
  for (std::size_t r = 0; r < q; ++r) {
    for (std::size_t j = 0; j < n; ++j) s[j] = scores.value()[r * n + j];
    total += 1.0 - smooth_ap(s.data(), relevance.data() + r * n, n, temperature, &grads[r * n]);
  }
  const double inv_q = 1.0 / static_cast<double>(q);
  return ctx->make(Tensor<T>({1}, std::vector<T>{static_cast<T>(total * inv_q)}), {scores},
                   [grads = std::move(grads), inv_q](const BackwardArgs<T>& g) {
    if (!g.grad_in[0]) return;
    const double go = g.grad_out[0] * inv_q;
    for (std::size_t i = 0; i < grads.size(); ++i) {
      (*g.grad_in[0])[i] -= static_cast<T>(go * grads[i]);
    }
  }, "listwise_loss");
}

template <class T>
Var<T> batch_listwise_loss(const Var<T>& embeddings, const std::vector<int>& group_ids,
                           double temperature) {
  require_matrix(embeddings.shape(), "batch_listwise_loss");
  const std::size_t b = embeddings.dim(0);
  if (group_ids.size() != b) throw DimensionError("batch_listwise_loss: one group id per row");
  std::vector<std::int8_t> rel(b * b);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      rel[i * b + j] = i == j ? -1 : (group_ids[i] == group_ids[j] ? 1 : 0);
    }
  }
  return listwise_loss(linear(embeddings, embeddings), rel, temperature);
}

template <class T>
Var<T> softmax_group_loss(const Var<T>& logits, const std::vector<std::size_t>& labels) {
  auto* ctx = ctx_of(logits);
  require_matrix(logits.shape(), "softmax_group_loss");
  const std::size_t b = logits.dim(0), k = logits.dim(1);
  if (labels.size() != b) throw DimensionError("softmax_group_loss: one label per row");
  std::vector<double> prob(b * k);
  double total = 0;
  for (std::size_t r = 0; r < b; ++r) {
    if (labels[r] >= k) throw DimensionError("softmax_group_loss: label out of range");
    const T* z = logits.value().raw() + r * k;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) mx = std::max(mx, double(z[c]));
    double acc = 0;
    for (std::size_t c = 0; c < k; ++c) acc += std::exp(double(z[c]) - mx);
    const double log_z = mx + std::log(acc);
    total += log_z - double(z[labels[r]]);
    for (std::size_t c = 0; c < k; ++c) prob[r * k + c] = std::exp(double(z[c]) - log_z);
    prob[r * k + labels[r]] -= 1.0;
  }
  const double inv_b = 1.0 / static_cast<double>(b);
  return ctx->make(Tensor<T>({1}, std::vector<T>{static_cast<T>(total * inv_b)}), {logits},
                   [prob = std::move(prob), inv_b](const BackwardArgs<T>& g) {
    if (!g.grad_in[0]) return;
    const double go = g.grad_out[0] * inv_b;
    for (std::size_t i = 0; i < prob.size(); ++i) {
      (*g.grad_in[0])[i] += static_cast<T>(go * prob[i]);
    }
  }, "softmax_group_loss");
}

#define ALADIN_INSTANTIATE_LOSSES(T)                                                          \
  template Var<T> contrastive_loss(const Var<T>&, const std::vector<int>&, double,            \
                                   ContrastiveForm);                                          \
  template std::vector<double> per_image_l1(const Tensor<T>&, const Tensor<T>&);              \
  template Var<T> reconstruction_loss(const Var<T>&, const Var<T>&);                          \
  template Var<T> triplet_loss(const Var<T>&, const Var<T>&, const Var<T>&, double);          \
  template Var<T> listwise_loss(const Var<T>&, const std::vector<std::int8_t>&, double);      \
  template Var<T> batch_listwise_loss(const Var<T>&, const std::vector<int>&, double);        \
  template Var<T> softmax_group_loss(const Var<T>&, const std::vector<std::size_t>&);

ALADIN_INSTANTIATE_LOSSES(float)
ALADIN_INSTANTIATE_LOSSES(double)

#undef ALADIN_INSTANTIATE_LOSSES

}  // namespace aladin
