// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#include "aladin/autodiff/tensor.hpp"

#include <sstream>

namespace aladin {

const char* dtype_name(DType dtype) {
  return dtype == DType::Float32 ? "float32" : "float64";
}

DType parse_dtype(const std::string& name) {
  if (name == "float32" || name == "f32") return DType::Float32;
  if (name == "float64" || name == "f64") return DType::Float64;
  throw UsageError("unknown dtype '" + name + "' (expected float32|float64)");
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

}  // namespace aladin
