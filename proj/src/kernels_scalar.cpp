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

#include "ivsid/kernels.hpp"

namespace ivsid::kern {
namespace {

void s_matmul(const double* A, const double* B, double* C, int m, int k,
              int n) {
  for (int i = 0; i < m; ++i) {
    double* crow = C + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) crow[j] = 0.0;
    const double* arow = A + static_cast<size_t>(i) * k;
    for (int l = 0; l < k; ++l) {
      const double a = arow[l];
      const double* brow = B + static_cast<size_t>(l) * n;
      for (int j = 0; j < n; ++j) crow[j] += a * brow[j];
    }
  }
}

void s_add(const double* a, const double* b, double* c, size_t n) {
  for (size_t i = 0; i < n; ++i) c[i] = a[i] + b[i];
}

void s_sub(const double* a, const double* b, double* c, size_t n) {
  for (size_t i = 0; i < n; ++i) c[i] = a[i] - b[i];
}

void s_mul(const double* a, const double* b, double* c, size_t n) {
  for (size_t i = 0; i < n; ++i) c[i] = a[i] * b[i];
}

void s_iv_mul(const double* alo, const double* ahi, const double* blo,
              const double* bhi, double* clo, double* chi, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    const double ll = alo[i] * blo[i];
    const double lh = alo[i] * bhi[i];
    const double hl = ahi[i] * blo[i];
    const double hh = ahi[i] * bhi[i];
    clo[i] = vmin(vmin(ll, lh), vmin(hl, hh));
    chi[i] = vmax(vmax(ll, lh), vmax(hl, hh));
  }
}

void s_iv_matmul(const double* Alo, const double* Ahi, const double* Blo,
                 const double* Bhi, double* Clo, double* Chi, int m, int k,
                 int n) {
  for (int i = 0; i < m; ++i) {
    double* clo = Clo + static_cast<size_t>(i) * n;
    double* chi = Chi + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      clo[j] = 0.0;
      chi[j] = 0.0;
    }
    const double* alo = Alo + static_cast<size_t>(i) * k;
    const double* ahi = Ahi + static_cast<size_t>(i) * k;
    for (int l = 0; l < k; ++l) {
      const double al = alo[l];
      const double ah = ahi[l];
      const double* blo = Blo + static_cast<size_t>(l) * n;
      const double* bhi = Bhi + static_cast<size_t>(l) * n;
      for (int j = 0; j < n; ++j) {
        const double ll = al * blo[j];
        const double lh = al * bhi[j];
        const double hl = ah * blo[j];
        const double hh = ah * bhi[j];
        clo[j] += vmin(vmin(ll, lh), vmin(hl, hh));
        chi[j] += vmax(vmax(ll, lh), vmax(hl, hh));
      }
    }
  }
}

void s_iv_matmul_dgb(const double* Alo, const double* Ahi, const double* B,
                     double* Clo, double* Chi, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    double* clo = Clo + static_cast<size_t>(i) * n;
    double* chi = Chi + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      clo[j] = 0.0;
      chi[j] = 0.0;
    }
    const double* alo = Alo + static_cast<size_t>(i) * k;
    const double* ahi = Ahi + static_cast<size_t>(i) * k;
    for (int l = 0; l < k; ++l) {
      const double al = alo[l];
      const double ah = ahi[l];
      const double* brow = B + static_cast<size_t>(l) * n;
      for (int j = 0; j < n; ++j) {
        const double p = al * brow[j];
        const double q = ah * brow[j];
        clo[j] += vmin(p, q);
        chi[j] += vmax(p, q);
      }
    }
  }
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels k = {
      "scalar", s_matmul,    s_add,          s_sub,
      s_mul,    s_iv_mul,    s_iv_matmul,    s_iv_matmul_dgb,
  };
  return k;
}

}  // namespace ivsid::kern
