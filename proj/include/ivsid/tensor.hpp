/*
 * Copyright 2025 The ivsid Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef IVSID_TENSOR_HPP
#define IVSID_TENSOR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ivsid {

// Dense row-major matrix of doubles. Vectors are n x 1 (columns) or
// 1 x n (rows) depending on context.
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Tensor() = default;
  Tensor(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {
    if (r < 0 || c < 0) throw std::invalid_argument("Tensor: negative shape");
  }
  Tensor(int r, int c, std::vector<double> values)
      : rows(r), cols(c), a(std::move(values)) {
    if (a.size() != static_cast<size_t>(r) * c)
      throw std::invalid_argument("Tensor: data size does not match shape");
  }

  static Tensor zeros(int r, int c) { return Tensor(r, c); }
  static Tensor full(int r, int c, double v) {
    Tensor t(r, c);
    for (auto& x : t.a) x = v;
    return t;
  }
  static Tensor row(std::vector<double> v) {
    const int n = static_cast<int>(v.size());
    return Tensor(1, n, std::move(v));
  }
  static Tensor col(std::vector<double> v) {
    const int n = static_cast<int>(v.size());
    return Tensor(n, 1, std::move(v));
  }

  size_t size() const { return a.size(); }
  bool empty() const { return a.empty(); }
  bool same_shape(const Tensor& o) const {
    return rows == o.rows && cols == o.cols;
  }

  double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
  double operator()(int i, int j) const {
    return a[static_cast<size_t>(i) * cols + j];
  }
  double& operator[](size_t i) { return a[i]; }
  double operator[](size_t i) const { return a[i]; }

  double* data() { return a.data(); }
  const double* data() const { return a.data(); }
  double* row_ptr(int i) { return a.data() + static_cast<size_t>(i) * cols; }
  const double* row_ptr(int i) const {
    return a.data() + static_cast<size_t>(i) * cols;
  }

  void fill(double v) {
    for (auto& x : a) x = v;
  }

  std::string shape_str() const {
    return std::to_string(rows) + "x" + std::to_string(cols);
  }
};

inline void require_same_shape(const Tensor& a, const Tensor& b,
                               const char* what) {
  if (!a.same_shape(b))
    throw std::invalid_argument(std::string(what) + ": shape mismatch " +
                                a.shape_str() + " vs " + b.shape_str());
}

}  // namespace ivsid

#endif  // IVSID_TENSOR_HPP
