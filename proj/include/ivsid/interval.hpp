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

#ifndef IVSID_INTERVAL_HPP
#define IVSID_INTERVAL_HPP

#include <cmath>
#include <span>
#include <stdexcept>

#include "ivsid/kernels.hpp"
#include "ivsid/tensor.hpp"

namespace ivsid::interval {

// Closed range [lo, hi] of reals. Degenerate (lo == hi) values represent
// crisp numbers. Endpoints must be finite and ordered; all operations on
// valid intervals produce valid intervals, so validation happens only here.
struct Interval {
  double lo;
  double hi;

  Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (!std::isfinite(lo) || !std::isfinite(hi))
      throw std::invalid_argument("Interval: endpoints must be finite");
    if (lo > hi) throw std::invalid_argument("Interval: lo > hi");
  }
  static Interval point(double v) { return Interval(v, v); }

  double width() const { return hi - lo; }
  bool degenerate() const { return lo == hi; }
  bool contains(double x) const { return lo <= x && x <= hi; }
  bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
};

enum class Activation { Sigmoid, Tanh, Relu, Identity };

Activation activation_from_string(const std::string& s);
const char* activation_name(Activation a);

double apply_activation(Activation a, double x);

// Derivative expressed through the activation output; valid for all
// supported kinds (relu output is positive iff its input is).
double activation_grad_from_output(Activation a, double y);

inline Interval add(const Interval& a, const Interval& b) {
  return Interval(a.lo + b.lo, a.hi + b.hi);
}

inline Interval sub(const Interval& a, const Interval& b) {
  return Interval(a.lo - b.hi, a.hi - b.lo);
}

// Which of the four endpoint products {lo*lo, lo*hi, hi*lo, hi*hi} realized
// the product's min and max. Ties break to the lowest index so gradient
// routing is deterministic.
struct MulExtrema {
  int argmin;  // 0: lo*lo, 1: lo*hi, 2: hi*lo, 3: hi*hi
  int argmax;
};

inline MulExtrema mul_extrema(double alo, double ahi, double blo, double bhi) {
  const double p[4] = {alo * blo, alo * bhi, ahi * blo, ahi * bhi};
  MulExtrema sel{0, 0};
  for (int i = 1; i < 4; ++i) {
    if (p[i] < p[sel.argmin]) sel.argmin = i;
    if (p[i] > p[sel.argmax]) sel.argmax = i;
  }
  return sel;
}

inline Interval mul(const Interval& a, const Interval& b) {
  const double ll = a.lo * b.lo;
  const double lh = a.lo * b.hi;
  const double hl = a.hi * b.lo;
  const double hh = a.hi * b.hi;
  return Interval(kern::vmin(kern::vmin(ll, lh), kern::vmin(hl, hh)),
                  kern::vmax(kern::vmax(ll, lh), kern::vmax(hl, hh)));
}

Interval mul(const Interval& a, const Interval& b, MulExtrema& sel);

// Exact interval dot product: per-term endpoint extrema summed with interval
// addition. Exact because each term's extrema occur at endpoints and
// addition separates over terms.
Interval dot(std::span<const Interval> u, std::span<const Interval> v);

Interval activate(Activation a, const Interval& x);

// Pair of equal-shape endpoint matrices with elementwise lo <= hi.
struct IntervalMatrix {
  Tensor lo;
  Tensor hi;

  IntervalMatrix() = default;
  IntervalMatrix(Tensor lo_, Tensor hi_);
  static IntervalMatrix point(const Tensor& v) { return IntervalMatrix(v, v); }

  int rows() const { return lo.rows; }
  int cols() const { return lo.cols; }

  Interval at(int i, int j) const { return Interval(lo(i, j), hi(i, j)); }
};

IntervalMatrix add(const IntervalMatrix& a, const IntervalMatrix& b);
IntervalMatrix sub(const IntervalMatrix& a, const IntervalMatrix& b);
IntervalMatrix matmul(const IntervalMatrix& a, const IntervalMatrix& b);
IntervalMatrix matmul(const IntervalMatrix& a, const Tensor& crisp_b);
IntervalMatrix hadamard(const IntervalMatrix& a, const IntervalMatrix& b);
IntervalMatrix activate(Activation k, const IntervalMatrix& x);

}  // namespace ivsid::interval

#endif  // IVSID_INTERVAL_HPP
