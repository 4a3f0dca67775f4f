// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aladin/autodiff/graph.hpp"
#include "json.hpp"

namespace aladin {

enum class LossKind { Contrastive, Triplet, Listwise, Softmax, ReconstructionOnly };

std::string loss_kind_name(LossKind k);
LossKind parse_loss_kind(const std::string& s);

// AsPrinted: L(i) = -log( sum_p exp(s_ip/tau) / sum_n exp(s_in/tau) ).
// SupCon: the usual mean over positives of log-softmax against all others.
enum class ContrastiveForm { AsPrinted, SupCon };

struct LossConfig {
  LossKind kind = LossKind::Contrastive;
  double tau = 0.1;
  double lambda_rec = 1e-2;
  double margin = 0.2;
  bool use_projection = true;
  // Hard negatives are drawn below this semantic distance when enabled.
  bool hard_negatives = false;
  double hn_threshold = 0.5;
  bool augmentation = false;
  ContrastiveForm form = ContrastiveForm::AsPrinted;
  double listwise_temperature = 0.01;

  void validate() const;
  nlohmann::json to_json() const;
  static LossConfig from_json(const nlohmann::json& j);
};

// Rows of `embeddings` must be unit length. Anchor i's positives are the other
// rows with its group id, its negatives the rows of every other group. Returns
// the sum over all anchors.
template <class T>
Var<T> contrastive_loss(const Var<T>& embeddings, const std::vector<int>& group_ids, double tau,
                        ContrastiveForm form = ContrastiveForm::AsPrinted);

// Per-image mean absolute error, computed in double, in batch order.
template <class T>
std::vector<double> per_image_l1(const Tensor<T>& decoded, const Tensor<T>& originals);

// Sum over images of the per-image mean absolute error.
template <class T>
Var<T> reconstruction_loss(const Var<T>& decoded, const Var<T>& originals);

// sum_m [margin + |a_m - p_m| - |n_m - p_m|]_+ over rows.
template <class T>
Var<T> triplet_loss(const Var<T>& anchor, const Var<T>& positive, const Var<T>& negative,
                    double margin);

// Smooth-AP of one ranking. relevance: 1 relevant, 0 irrelevant, -1 ignored.
// Returns the surrogate AP and writes d(AP)/d(scores) into `grad` when given.
double smooth_ap(const double* scores, const std::int8_t* relevance, std::size_t n,
                 double temperature, double* grad = nullptr);

// Mean over rows of (1 - smooth-AP). scores: [Q, n]; relevance: Q*n entries.
template <class T>
Var<T> listwise_loss(const Var<T>& scores, const std::vector<std::int8_t>& relevance,
                     double temperature);

// Listwise loss over a batch: each row queries all other rows by dot product.
template <class T>
Var<T> batch_listwise_loss(const Var<T>& embeddings, const std::vector<int>& group_ids,
                           double temperature);

// Mean cross-entropy of logits [B, K] against class labels.
template <class T>
Var<T> softmax_group_loss(const Var<T>& logits, const std::vector<std::size_t>& labels);

}  // namespace aladin
