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

#ifndef IVSID_KERNELS_HPP
#define IVSID_KERNELS_HPP

#include <cstddef>
#include <string>

namespace ivsid::kern {

// Dense kernels for crisp and interval arithmetic. Every variant computes
// each output element with the same scalar operation sequence: outputs are
// independent and accumulate over the inner dimension in index order. SIMD
// variants vectorize across output columns only, so all variants produce
// bitwise-identical results (the build disables FP contraction).

struct Kernels {
  const char* name;

  // C(m x n) = A(m x k) . B(k x n), row-major.
  void (*matmul)(const double* A, const double* B, double* C, int m, int k,
                 int n);

  // Elementwise c = a op b over n values.
  void (*add)(const double* a, const double* b, double* c, size_t n);
  void (*sub)(const double* a, const double* b, double* c, size_t n);
  void (*mul)(const double* a, const double* b, double* c, size_t n);

  // Elementwise interval product: [clo,chi] = [alo,ahi] * [blo,bhi].
  void (*iv_mul)(const double* alo, const double* ahi, const double* blo,
                 const double* bhi, double* clo, double* chi, size_t n);

  // Interval matrix product, endpoint-extrema per term summed in index order.
  void (*iv_matmul)(const double* Alo, const double* Ahi, const double* Blo,
                    const double* Bhi, double* Clo, double* Chi, int m, int k,
                    int n);

  // Interval matrix times crisp (degenerate) right operand.
  void (*iv_matmul_dgb)(const double* Alo, const double* Ahi, const double* B,
                        double* Clo, double* Chi, int m, int k, int n);
};

// Matches the x86 vminpd/vmaxpd selection rule (returns b on ties), used by
// every scalar kernel and by the interval value semantics.
inline double vmin(double a, double b) { return a < b ? a : b; }
inline double vmax(double a, double b) { return a > b ? a : b; }

const Kernels& scalar_kernels();
#if defined(__x86_64__) || defined(__i386__)
const Kernels& avx2_kernels();
#endif

bool avx2_supported();

// Active kernel set. Chosen once at first use: the IVSID_KERNELS environment
// variable ("scalar", "avx2", "auto") overrides auto-detection.
const Kernels& active();

// Force a specific variant ("scalar", "avx2", "auto"); throws on unknown
// names or when the variant is unavailable on this machine.
void select(const std::string& name);

}  // namespace ivsid::kern

#endif  // IVSID_KERNELS_HPP
