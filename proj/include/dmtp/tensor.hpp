// Copyright 2026 The DMTP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DMTP_TENSOR_HPP_
#define DMTP_TENSOR_HPP_

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "dmtp/common.hpp"

namespace dmtp
{

inline std::int64_t shape_numel(const std::vector<int> & shape)
{
  std::int64_t n = 1;
  for (int d : shape) {
    n *= d;
  }
  return n;
}

inline std::string shape_str(const std::vector<int> & shape)
{
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) {
      s += ",";
    }
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

/// Dense double-precision tensor. Flat row-major storage; immutable by
/// convention once handed to a tape.
struct Tensor
{
  std::vector<int> shape;
  std::vector<double> data;
  bool requires_grad = false;

  Tensor() = default;

  Tensor(std::vector<int> shape_in, std::vector<double> data_in)
  : shape(std::move(shape_in)), data(std::move(data_in))
  {
    if (shape_numel(shape) != static_cast<std::int64_t>(data.size())) {
      throw ShapeError(
        "tensor: shape " + shape_str(shape) + " does not match data length " +
        std::to_string(data.size()));
    }
    for (int d : shape) {
      if (d <= 0) {
        throw ShapeError("tensor: non-positive dimension in " + shape_str(shape));
      }
    }
  }

  static Tensor zeros(std::vector<int> shape)
  {
    const auto n = static_cast<std::size_t>(shape_numel(shape));
    return Tensor(std::move(shape), std::vector<double>(n, 0.0));
  }

  static Tensor full(std::vector<int> shape, double v)
  {
    const auto n = static_cast<std::size_t>(shape_numel(shape));
    return Tensor(std::move(shape), std::vector<double>(n, v));
  }

  static Tensor scalar(double v) { return Tensor({1}, {v}); }

  std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }
  int rank() const { return static_cast<int>(shape.size()); }
  int rows() const { return shape.empty() ? 1 : shape[0]; }
  int cols() const { return rank() < 2 ? 1 : shape[1]; }

  double & at(int i) { return data[static_cast<std::size_t>(i)]; }
  double at(int i) const { return data[static_cast<std::size_t>(i)]; }
  double & at(int i, int j) { return data[static_cast<std::size_t>(i) * cols() + j]; }
  double at(int i, int j) const { return data[static_cast<std::size_t>(i) * cols() + j]; }

  bool all_finite() const
  {
    for (double v : data) {
      if (!std::isfinite(v)) {
        return false;
      }
    }
    return true;
  }

  bool same_shape(const Tensor & other) const { return shape == other.shape; }
};

namespace detail
{

// C = A(m,k) * B(k,n), C preallocated.
inline void mm(const double * a, const double * b, double * c, int m, int k, int n)
{
  std::fill(c, c + static_cast<std::size_t>(m) * n, 0.0);
  for (int i = 0; i < m; ++i) {
    const double * arow = a + static_cast<std::size_t>(i) * k;
    double * crow = c + static_cast<std::size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      const double av = arow[p];
      const double * brow = b + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) {
        crow[j] += av * brow[j];
      }
    }
  }
}

// C(m,k) += A(m,n) * B(k,n)^T
inline void mm_nt_acc(const double * a, const double * b, double * c, int m, int n, int k)
{
  for (int i = 0; i < m; ++i) {
    const double * arow = a + static_cast<std::size_t>(i) * n;
    double * crow = c + static_cast<std::size_t>(i) * k;
    for (int j = 0; j < k; ++j) {
      const double * brow = b + static_cast<std::size_t>(j) * n;
      double acc = 0.0;
      for (int p = 0; p < n; ++p) {
        acc += arow[p] * brow[p];
      }
      crow[j] += acc;
    }
  }
}

// C(k,n) += A(m,k)^T * B(m,n)
inline void mm_tn_acc(const double * a, const double * b, double * c, int m, int k, int n)
{
  for (int i = 0; i < m; ++i) {
    const double * arow = a + static_cast<std::size_t>(i) * k;
    const double * brow = b + static_cast<std::size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      const double av = arow[p];
      double * crow = c + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) {
        crow[j] += av * brow[j];
      }
    }
  }
}

}  // namespace detail

}  // namespace dmtp

#endif  // DMTP_TENSOR_HPP_
