// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "aladin/core/errors.hpp"

namespace aladin {

enum class DType { Float32, Float64 };

template <class T>
constexpr DType dtype_of() {
  static_assert(std::is_same_v<T, float> || std::is_same_v<T, double>,
                "tensors hold float or double");
  return std::is_same_v<T, float> ? DType::Float32 : DType::Float64;
}

const char* dtype_name(DType dtype);
DType parse_dtype(const std::string& name);

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);

inline std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

/// Dense row-major array. Value semantics: copies are deep.
template <class T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;

  explicit Tensor(Shape shape, T fill = T(0))
      : shape_(std::move(shape)), data_(shape_numel(shape_), fill) {}

  Tensor(Shape shape, std::vector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_numel(shape_)) {
      throw DimensionError("tensor data size " + std::to_string(data_.size()) +
                           " does not match shape " + shape_string(shape_));
    }
  }

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape), T(0)); }
  static Tensor ones(Shape shape) { return Tensor(std::move(shape), T(1)); }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t numel() const { return data_.size(); }
  bool empty() const { return shape_.empty() && data_.empty(); }
  static constexpr DType dtype() { return dtype_of<T>(); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  T* raw() { return data_.data(); }
  const T* raw() const { return data_.data(); }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  // Scalar read for rank-0 or single-element tensors.
  T item() const {
    if (data_.size() != 1) throw DimensionError("item() on tensor of shape " + shape_string(shape_));
    return data_[0];
  }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](T v) { return std::isfinite(v); });
  }

  Tensor reshaped(Shape shape) const {
    if (shape_numel(shape) != data_.size()) {
      throw DimensionError("cannot reshape " + shape_string(shape_) + " to " +
                           shape_string(shape));
    }
    return Tensor(std::move(shape), data_);
  }

  template <class U>
  Tensor<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return Tensor<U>(shape_, std::move(out));
  }

  // Add `other` elementwise; shapes must match.
  void add_inplace(const Tensor& other) {
    check_same_shape(other, "add_inplace");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  }

  void check_same_shape(const Tensor& other, const char* what) const {
    if (shape_ != other.shape_) {
      throw DimensionError(std::string(what) + ": shape " + shape_string(shape_) +
                           " vs " + shape_string(other.shape_));
    }
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Shape shape_;
  std::vector<T> data_;
};

// Rows [begin, end) along the leading dimension.
template <class T>
Tensor<T> slice_rows(const Tensor<T>& t, std::size_t begin, std::size_t end) {
  if (t.rank() == 0 || begin > end || end > t.dim(0)) {
    throw DimensionError("slice_rows out of range for shape " + shape_string(t.shape()));
  }
  const std::size_t row = t.numel() / t.dim(0);
  Shape shape = t.shape();
  shape[0] = end - begin;
  std::vector<T> data(t.data().begin() + begin * row, t.data().begin() + end * row);
  return Tensor<T>(std::move(shape), std::move(data));
}

// Concatenate along the leading dimension; trailing dims must agree.
template <class T>
Tensor<T> concat_rows(std::span<const Tensor<T>> parts) {
  if (parts.empty()) throw DimensionError("concat_rows of nothing");
  Shape shape = parts[0].shape();
  std::vector<T> data;
  std::size_t rows = 0;
  for (const auto& p : parts) {
    if (p.rank() != shape.size() ||
        !std::equal(p.shape().begin() + 1, p.shape().end(), shape.begin() + 1)) {
      throw DimensionError("concat_rows: incompatible shape " + shape_string(p.shape()));
    }
    rows += p.dim(0);
    data.insert(data.end(), p.data().begin(), p.data().end());
  }
  shape[0] = rows;
  return Tensor<T>(std::move(shape), std::move(data));
}

// Stack equally shaped tensors under a new leading dimension.
template <class T>
Tensor<T> stack(std::span<const Tensor<T>> items) {
  if (items.empty()) throw DimensionError("stack of nothing");
  Shape shape = items[0].shape();
  std::vector<T> data;
  data.reserve(items.size() * items[0].numel());
  for (const auto& it : items) {
    if (it.shape() != shape) throw DimensionError("stack: mismatched shapes");
    data.insert(data.end(), it.data().begin(), it.data().end());
  }
  shape.insert(shape.begin(), items.size());
  return Tensor<T>(std::move(shape), std::move(data));
}

template <class T>
Tensor<T> row(const Tensor<T>& t, std::size_t i) {
  Tensor<T> r = slice_rows(t, i, i + 1);
  Shape s(t.shape().begin() + 1, t.shape().end());
  return r.reshaped(s);
}

}  // namespace aladin
