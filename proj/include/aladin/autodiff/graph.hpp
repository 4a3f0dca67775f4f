// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "aladin/autodiff/tensor.hpp"

namespace aladin {

/// A trainable tensor with its accumulated gradient.
template <class T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;  // empty until the first accumulation

  bool has_grad() const { return !grad.empty(); }

  void accumulate(const Tensor<T>& g) {
    if (grad.empty()) {
      grad = Tensor<T>::zeros(value.shape());
    }
    grad.add_inplace(g);
  }

  void zero_grad() { grad = Tensor<T>(); }
};

/// Ordered, name-addressable set of parameters with stable addresses.
template <class T>
class ParameterSet {
 public:
  Parameter<T>& add(const std::string& name, Tensor<T> value) {
    if (index_.count(name)) throw UsageError("duplicate parameter name '" + name + "'");
    index_[name] = items_.size();
    items_.push_back(Parameter<T>{name, std::move(value), {}});
    return items_.back();
  }

  Parameter<T>& get(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw UsageError("no parameter named '" + name + "'");
    return items_[it->second];
  }
  const Parameter<T>& get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw UsageError("no parameter named '" + name + "'");
    return items_[it->second];
  }
  bool contains(const std::string& name) const { return index_.count(name) > 0; }

  std::size_t size() const { return items_.size(); }
  std::size_t total_elements() const {
    std::size_t n = 0;
    for (const auto& p : items_) n += p.value.numel();
    return n;
  }

  auto begin() { return items_.begin(); }
  auto end() { return items_.end(); }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

  void zero_grad() {
    for (auto& p : items_) p.zero_grad();
  }

  std::vector<Parameter<T>*> pointers() {
    std::vector<Parameter<T>*> out;
    for (auto& p : items_) out.push_back(&p);
    return out;
  }

 private:
  std::deque<Parameter<T>> items_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Counts elements held by live recorded activations, and separately by op
/// outputs of no-grad contexts. Thread-local: each thread records its own
/// graphs.
struct ActivationMeter {
  std::size_t live = 0;
  std::size_t peak = 0;
  std::size_t transient_live = 0;
  std::size_t transient_peak = 0;

  static ActivationMeter& instance() {
    thread_local ActivationMeter meter;
    return meter;
  }
  void reset_peak() {
    peak = live;
    transient_peak = transient_live;
  }
  void add(std::size_t n) {
    live += n;
    if (live > peak) peak = live;
  }
  void remove(std::size_t n) { live -= n; }
  void add_transient(std::size_t n) {
    transient_live += n;
    if (transient_live > transient_peak) transient_peak = transient_live;
  }
  void remove_transient(std::size_t n) { transient_live -= n; }
};

template <class T>
class GradContext;

template <class T>
struct BackwardArgs {
  const Tensor<T>& out;
  const Tensor<T>& grad_out;
  std::vector<const Tensor<T>*> in;
  // nullptr for inputs that do not need a gradient.
  std::vector<Tensor<T>*> grad_in;
};

template <class T>
using BackwardFn = std::function<void(const BackwardArgs<T>&)>;

namespace detail {

template <class T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;
  std::vector<std::shared_ptr<Node>> inputs;
  BackwardFn<T> backward;
  Parameter<T>* param = nullptr;
  bool requires_grad = false;
  std::size_t metered = 0;
  bool transient = false;

  ~Node() {
    if (!metered) return;
    if (transient) {
      ActivationMeter::instance().remove_transient(metered);
    } else {
      ActivationMeter::instance().remove(metered);
    }
  }

  Tensor<T>& ensure_grad() {
    if (grad.empty()) grad = Tensor<T>::zeros(value.shape());
    return grad;
  }
};

}  // namespace detail

/// Handle to a value inside a GradContext.
template <class T>
class Var {
 public:
  Var() = default;

  const Tensor<T>& value() const { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  std::size_t dim(std::size_t i) const { return node_->value.dim(i); }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  bool valid() const { return static_cast<bool>(node_); }
  GradContext<T>* context() const { return ctx_; }

 private:
  friend class GradContext<T>;
  Var(std::shared_ptr<detail::Node<T>> node, GradContext<T>* ctx)
      : node_(std::move(node)), ctx_(ctx) {}

  std::shared_ptr<detail::Node<T>> node_;
  GradContext<T>* ctx_ = nullptr;
};

template <class T>
struct Seed {
  Var<T> node;
  Tensor<T> cotangent;
};

/// Records a computation graph and runs reverse-mode differentiation over it.
///
/// In NoGrad mode operations produce values only; intermediates are released
/// as soon as their handles go out of scope. In Record mode every node that
/// needs a gradient is kept in creation order (a valid topological order)
/// until the single allowed backward pass consumes the graph.
template <class T>
class GradContext {
 public:
  enum class Mode { Record, NoGrad };

  explicit GradContext(Mode mode = Mode::Record) : mode_(mode) {}
  GradContext(const GradContext&) = delete;
  GradContext& operator=(const GradContext&) = delete;

  static std::unique_ptr<GradContext> no_grad() {
    return std::make_unique<GradContext>(Mode::NoGrad);
  }

  bool recording() const { return mode_ == Mode::Record; }
  bool consumed() const { return consumed_; }

  // Leaf holding data; differentiable only if requested.
  Var<T> input(Tensor<T> value, bool requires_grad = false) {
    check_finite(value, "input");
    auto node = std::make_shared<detail::Node<T>>();
    node->value = std::move(value);
    node->requires_grad = requires_grad && recording();
    if (node->requires_grad) track(node, true);
    return Var<T>(std::move(node), this);
  }

  Var<T> constant(Tensor<T> value) { return input(std::move(value), false); }

  // Leaf bound to a parameter. Gradients reaching it accumulate into
  // Parameter::grad during backward().
  Var<T> param(Parameter<T>& p) {
    auto node = std::make_shared<detail::Node<T>>();
    node->value = p.value;
    if (recording()) {
      node->param = &p;
      node->requires_grad = true;
      track(node, false);
    }
    return Var<T>(std::move(node), this);
  }

  // Marks a node whose cotangent grads_at() may return. Must precede the
  // operations that consume it.
  void watch(const Var<T>& v) {
    check_owner(v);
    if (!recording()) throw UsageError("watch() on a no-grad context");
    if (!v.node_->requires_grad) {
      v.node_->requires_grad = true;
      track(v.node_, true);
    }
    watched_.push_back(v.node_.get());
  }

  bool is_watched(const Var<T>& v) const {
    for (const auto* n : watched_) {
      if (n == v.node_.get()) return true;
    }
    return false;
  }

  // Creates the output node of an operation. `backward` receives the output
  // cotangent and adds into the input cotangents.
  Var<T> make(Tensor<T> value, std::vector<Var<T>> inputs, BackwardFn<T> backward,
              const char* op_name) {
    check_finite(value, op_name);
    auto node = std::make_shared<detail::Node<T>>();
    node->value = std::move(value);
    bool needs = false;
    for (const auto& in : inputs) {
      check_owner(in);
      needs = needs || in.requires_grad();
    }
    if (recording() && needs) {
      node->requires_grad = true;
      node->backward = std::move(backward);
      node->inputs.reserve(inputs.size());
      for (auto& in : inputs) node->inputs.push_back(in.node_);
      track(node, true);
    } else {
      node->metered = node->value.numel();
      node->transient = true;
      ActivationMeter::instance().add_transient(node->metered);
    }
    return Var<T>(std::move(node), this);
  }

  // d(loss)/d(param) accumulated into every bound Parameter.
  void backward(const Var<T>& loss) {
    require_scalar(loss);
    Tensor<T> seed(loss.shape(), T(1));
    run({Seed<T>{loss, std::move(seed)}}, /*to_params=*/true, {});
  }

  // Cotangents at watched nodes; Parameter grads are not touched.
  std::vector<Tensor<T>> grads_at(const Var<T>& loss, const std::vector<Var<T>>& nodes) {
    return collect(loss, nodes, /*to_params=*/false);
  }

  // Like grads_at(), but also accumulates into bound Parameters (used when
  // the loss itself owns parameters, e.g. a classifier head).
  std::vector<Tensor<T>> backward_and_collect(const Var<T>& loss,
                                              const std::vector<Var<T>>& nodes) {
    return collect(loss, nodes, /*to_params=*/true);
  }

  // Seeds the given nodes with externally computed cotangents and propagates
  // to Parameters: grads += sum_k cotangent_k^T * d(node_k)/d(param).
  void inject_and_backward(std::vector<Seed<T>> seeds) {
    for (const auto& s : seeds) {
      if (s.cotangent.shape() != s.node.shape()) {
        throw DimensionError("cotangent shape " + shape_string(s.cotangent.shape()) +
                             " does not match node shape " + shape_string(s.node.shape()));
      }
    }
    run(std::move(seeds), /*to_params=*/true, {});
  }

  std::size_t recorded_nodes() const { return tape_.size(); }

 private:
  std::vector<Tensor<T>> collect(const Var<T>& loss, const std::vector<Var<T>>& nodes,
                                 bool to_params) {
    require_scalar(loss);
    for (const auto& n : nodes) {
      check_owner(n);
      if (!is_watched(n)) throw UsageError("grads_at: node was not watched before forward");
    }
    std::vector<const detail::Node<T>*> targets;
    for (const auto& n : nodes) targets.push_back(n.node_.get());
    Tensor<T> seed(loss.shape(), T(1));
    std::vector<Tensor<T>> out(nodes.size());
    run({Seed<T>{loss, std::move(seed)}}, to_params, [&](const detail::Node<T>* node) {
      for (std::size_t i = 0; i < targets.size(); ++i) {
        if (targets[i] == node) {
          out[i] = node->grad.empty() ? Tensor<T>::zeros(node->value.shape()) : node->grad;
        }
      }
    });
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (out[i].empty()) out[i] = Tensor<T>::zeros(nodes[i].shape());
    }
    return out;
  }

  void run(std::vector<Seed<T>> seeds, bool to_params,
           const std::function<void(const detail::Node<T>*)>& on_node) {
    if (!recording()) throw UsageError("backward on a no-grad context");
    if (consumed_) throw UsageError("backward already ran on this context");
    consumed_ = true;
    for (auto& s : seeds) {
      check_owner(s.node);
      if (!s.node.requires_grad()) continue;
      s.node.node_->ensure_grad().add_inplace(s.cotangent);
    }
    for (auto it = tape_.rbegin(); it != tape_.rend(); ++it) {
      auto& node = **it;
      if (on_node) on_node(&node);
      if (node.grad.empty()) continue;
      if (node.param) {
        if (to_params) node.param->accumulate(node.grad);
        continue;
      }
      if (!node.backward) continue;
      BackwardArgs<T> args{node.value, node.grad, {}, {}};
      for (auto& in : node.inputs) {
        args.in.push_back(&in->value);
        args.grad_in.push_back(in->requires_grad ? &in->ensure_grad() : nullptr);
      }
      node.backward(args);
      // Intermediate cotangents are no longer needed once propagated.
      if (!on_node) node.grad = Tensor<T>();
    }
    tape_.clear();
    watched_.clear();
  }

  void track(const std::shared_ptr<detail::Node<T>>& node, bool meter) {
    if (meter && node->metered == 0) {
      node->metered = node->value.numel();
      ActivationMeter::instance().add(node->metered);
    }
    tape_.push_back(node);
  }

  void check_owner(const Var<T>& v) const {
    if (!v.valid()) throw UsageError("use of an empty Var");
    if (v.ctx_ != this) throw UsageError("Var belongs to a different GradContext");
  }

  static void require_scalar(const Var<T>& loss) {
    if (loss.value().numel() != 1) {
      throw DimensionError("loss must be a scalar, got shape " + shape_string(loss.shape()));
    }
  }

  static void check_finite(const Tensor<T>& t, const char* op) {
    if (!t.all_finite()) throw NumericError(std::string("non-finite value produced by ") + op);
  }

  Mode mode_;
  bool consumed_ = false;
  std::vector<std::shared_ptr<detail::Node<T>>> tape_;
  std::vector<const detail::Node<T>*> watched_;
};

}  // namespace aladin
