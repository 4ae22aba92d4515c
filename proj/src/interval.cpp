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

#include "ivsid/interval.hpp"

#include <string>

namespace ivsid::interval {

Activation activation_from_string(const std::string& s) {
  if (s == "sigmoid") return Activation::Sigmoid;
  if (s == "tanh") return Activation::Tanh;
  if (s == "relu") return Activation::Relu;
  if (s == "identity") return Activation::Identity;
  throw std::invalid_argument("unknown activation kind '" + s + "'");
}

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Tanh: return "tanh";
    case Activation::Relu: return "relu";
    case Activation::Identity: return "identity";
  }
  throw std::invalid_argument("unknown activation kind");
}

double apply_activation(Activation a, double x) {
  switch (a) {
    case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-x));
    case Activation::Tanh: return std::tanh(x);
    case Activation::Relu: return x > 0.0 ? x : 0.0;
    case Activation::Identity: return x;
  }
  throw std::invalid_argument("unknown activation kind");
}

double activation_grad_from_output(Activation a, double y) {
  switch (a) {
    case Activation::Sigmoid: return y * (1.0 - y);
    case Activation::Tanh: return 1.0 - y * y;
    case Activation::Relu: return y > 0.0 ? 1.0 : 0.0;
    case Activation::Identity: return 1.0;
  }
  throw std::invalid_argument("unknown activation kind");
}

Interval mul(const Interval& a, const Interval& b, MulExtrema& sel) {
  sel = mul_extrema(a.lo, a.hi, b.lo, b.hi);
  return mul(a, b);
}

Interval dot(std::span<const Interval> u, std::span<const Interval> v) {
  if (u.size() != v.size())
    throw std::invalid_argument("interval dot: length mismatch");
  double lo = 0.0;
  double hi = 0.0;
  for (size_t i = 0; i < u.size(); ++i) {
    const Interval p = mul(u[i], v[i]);
    lo += p.lo;
    hi += p.hi;
  }
  return Interval(lo, hi);
}

Interval activate(Activation a, const Interval& x) {
  return Interval(apply_activation(a, x.lo), apply_activation(a, x.hi));
}

IntervalMatrix::IntervalMatrix(Tensor lo_, Tensor hi_)
    : lo(std::move(lo_)), hi(std::move(hi_)) {
  require_same_shape(lo, hi, "IntervalMatrix");
  for (size_t i = 0; i < lo.size(); ++i) {
    if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]))
      throw std::invalid_argument("IntervalMatrix: endpoints must be finite");
    if (lo[i] > hi[i])
      throw std::invalid_argument("IntervalMatrix: lo > hi at element " +
                                  std::to_string(i));
  }
}

IntervalMatrix add(const IntervalMatrix& a, const IntervalMatrix& b) {
  require_same_shape(a.lo, b.lo, "interval add");
  Tensor lo(a.rows(), a.cols());
  Tensor hi(a.rows(), a.cols());
  const auto& k = kern::active();
  k.add(a.lo.data(), b.lo.data(), lo.data(), lo.size());
  k.add(a.hi.data(), b.hi.data(), hi.data(), hi.size());
  return IntervalMatrix(std::move(lo), std::move(hi));
}

IntervalMatrix sub(const IntervalMatrix& a, const IntervalMatrix& b) {
  require_same_shape(a.lo, b.lo, "interval sub");
  Tensor lo(a.rows(), a.cols());
  Tensor hi(a.rows(), a.cols());
  const auto& k = kern::active();
  k.sub(a.lo.data(), b.hi.data(), lo.data(), lo.size());
  k.sub(a.hi.data(), b.lo.data(), hi.data(), hi.size());
  return IntervalMatrix(std::move(lo), std::move(hi));
}

IntervalMatrix matmul(const IntervalMatrix& a, const IntervalMatrix& b) {
  if (a.cols() != b.rows())
    throw std::invalid_argument("interval matmul: inner dimension mismatch " +
                                a.lo.shape_str() + " vs " + b.lo.shape_str());
  Tensor lo(a.rows(), b.cols());
  Tensor hi(a.rows(), b.cols());
  kern::active().iv_matmul(a.lo.data(), a.hi.data(), b.lo.data(), b.hi.data(),
                           lo.data(), hi.data(), a.rows(), a.cols(), b.cols());
  return IntervalMatrix(std::move(lo), std::move(hi));
}

IntervalMatrix matmul(const IntervalMatrix& a, const Tensor& crisp_b) {
  if (a.cols() != crisp_b.rows)
    throw std::invalid_argument("interval matmul: inner dimension mismatch " +
                                a.lo.shape_str() + " vs " + crisp_b.shape_str());
  Tensor lo(a.rows(), crisp_b.cols);
  Tensor hi(a.rows(), crisp_b.cols);
  kern::active().iv_matmul_dgb(a.lo.data(), a.hi.data(), crisp_b.data(),
                               lo.data(), hi.data(), a.rows(), a.cols(),
                               crisp_b.cols);
  return IntervalMatrix(std::move(lo), std::move(hi));
}

IntervalMatrix hadamard(const IntervalMatrix& a, const IntervalMatrix& b) {
  require_same_shape(a.lo, b.lo, "interval hadamard");
  Tensor lo(a.rows(), a.cols());
  Tensor hi(a.rows(), a.cols());
  kern::active().iv_mul(a.lo.data(), a.hi.data(), b.lo.data(), b.hi.data(),
                        lo.data(), hi.data(), lo.size());
  return IntervalMatrix(std::move(lo), std::move(hi));
}

IntervalMatrix activate(Activation k, const IntervalMatrix& x) {
  Tensor lo(x.rows(), x.cols());
  Tensor hi(x.rows(), x.cols());
  for (size_t i = 0; i < lo.size(); ++i) {
    lo[i] = apply_activation(k, x.lo[i]);
    hi[i] = apply_activation(k, x.hi[i]);
  }
  return IntervalMatrix(std::move(lo), std::move(hi));
}

}  // namespace ivsid::interval
