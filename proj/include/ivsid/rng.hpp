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

#ifndef IVSID_RNG_HPP
#define IVSID_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

#include "ivsid/tensor.hpp"

namespace ivsid {

// Seeded generator with hand-rolled uniform mapping so streams do not depend
// on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Fisher-Yates permutation of {0, ..., n-1}.
  std::vector<int> permutation(int n) {
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(next_u64() % static_cast<uint64_t>(i + 1));
      std::swap(p[i], p[j]);
    }
    return p;
  }

  void fill_uniform(Tensor& t, double lo, double hi) {
    for (auto& x : t.a) x = uniform(lo, hi);
  }

  // Glorot/Xavier uniform init with the given fan counts.
  void fill_glorot(Tensor& t, int fan_in, int fan_out) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    fill_uniform(t, -limit, limit);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace ivsid

#endif  // IVSID_RNG_HPP
