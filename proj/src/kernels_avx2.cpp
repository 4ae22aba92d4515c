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

// AVX2 kernel variants. Lanes run across output columns; per-element
// accumulation order is identical to the scalar kernels, so results are
// bitwise equal. This file is compiled with -mavx2 and only reached after a
// runtime CPU check.

#include "ivsid/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

namespace ivsid::kern {
namespace {

void v_matmul(const double* A, const double* B, double* C, int m, int k,
              int n) {
  const int n4 = n & ~3;
  for (int i = 0; i < m; ++i) {
    double* crow = C + static_cast<size_t>(i) * n;
    for (int j = 0; j < n4; j += 4) _mm256_storeu_pd(crow + j, _mm256_setzero_pd());
    for (int j = n4; j < n; ++j) crow[j] = 0.0;
    const double* arow = A + static_cast<size_t>(i) * k;
    for (int l = 0; l < k; ++l) {
      const double a = arow[l];
      const __m256d av = _mm256_set1_pd(a);
      const double* brow = B + static_cast<size_t>(l) * n;
      for (int j = 0; j < n4; j += 4) {
        __m256d c = _mm256_loadu_pd(crow + j);
        c = _mm256_add_pd(c, _mm256_mul_pd(av, _mm256_loadu_pd(brow + j)));
        _mm256_storeu_pd(crow + j, c);
      }
      for (int j = n4; j < n; ++j) crow[j] += a * brow[j];
    }
  }
}

void v_add(const double* a, const double* b, double* c, size_t n) {
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(c + i, _mm256_add_pd(_mm256_loadu_pd(a + i),
                                          _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) c[i] = a[i] + b[i];
}

void v_sub(const double* a, const double* b, double* c, size_t n) {
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(c + i, _mm256_sub_pd(_mm256_loadu_pd(a + i),
                                          _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) c[i] = a[i] - b[i];
}

void v_mul(const double* a, const double* b, double* c, size_t n) {
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(c + i, _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                          _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) c[i] = a[i] * b[i];
}

void v_iv_mul(const double* alo, const double* ahi, const double* blo,
              const double* bhi, double* clo, double* chi, size_t n) {
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d al = _mm256_loadu_pd(alo + i);
    const __m256d ah = _mm256_loadu_pd(ahi + i);
    const __m256d bl = _mm256_loadu_pd(blo + i);
    const __m256d bh = _mm256_loadu_pd(bhi + i);
    const __m256d ll = _mm256_mul_pd(al, bl);
    const __m256d lh = _mm256_mul_pd(al, bh);
    const __m256d hl = _mm256_mul_pd(ah, bl);
    const __m256d hh = _mm256_mul_pd(ah, bh);
    _mm256_storeu_pd(clo + i, _mm256_min_pd(_mm256_min_pd(ll, lh),
                                            _mm256_min_pd(hl, hh)));
    _mm256_storeu_pd(chi + i, _mm256_max_pd(_mm256_max_pd(ll, lh),
                                            _mm256_max_pd(hl, hh)));
  }
  for (; i < n; ++i) {
    const double ll = alo[i] * blo[i];
    const double lh = alo[i] * bhi[i];
    const double hl = ahi[i] * blo[i];
    const double hh = ahi[i] * bhi[i];
    clo[i] = vmin(vmin(ll, lh), vmin(hl, hh));
    chi[i] = vmax(vmax(ll, lh), vmax(hl, hh));
  }
}

void v_iv_matmul(const double* Alo, const double* Ahi, const double* Blo,
                 const double* Bhi, double* Clo, double* Chi, int m, int k,
                 int n) {
  const int n4 = n & ~3;
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
      const __m256d alv = _mm256_set1_pd(al);
      const __m256d ahv = _mm256_set1_pd(ah);
      const double* blo = Blo + static_cast<size_t>(l) * n;
      const double* bhi = Bhi + static_cast<size_t>(l) * n;
      for (int j = 0; j < n4; j += 4) {
        const __m256d bl = _mm256_loadu_pd(blo + j);
        const __m256d bh = _mm256_loadu_pd(bhi + j);
        const __m256d ll = _mm256_mul_pd(alv, bl);
        const __m256d lh = _mm256_mul_pd(alv, bh);
        const __m256d hl = _mm256_mul_pd(ahv, bl);
        const __m256d hh = _mm256_mul_pd(ahv, bh);
        const __m256d lo = _mm256_min_pd(_mm256_min_pd(ll, lh),
                                         _mm256_min_pd(hl, hh));
        const __m256d hi = _mm256_max_pd(_mm256_max_pd(ll, lh),
                                         _mm256_max_pd(hl, hh));
        _mm256_storeu_pd(clo + j, _mm256_add_pd(_mm256_loadu_pd(clo + j), lo));
        _mm256_storeu_pd(chi + j, _mm256_add_pd(_mm256_loadu_pd(chi + j), hi));
      }
      for (int j = n4; j < n; ++j) {
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

void v_iv_matmul_dgb(const double* Alo, const double* Ahi, const double* B,
                     double* Clo, double* Chi, int m, int k, int n) {
  const int n4 = n & ~3;
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
      const __m256d alv = _mm256_set1_pd(alo[l]);
      const __m256d ahv = _mm256_set1_pd(ahi[l]);
      const double* brow = B + static_cast<size_t>(l) * n;
      for (int j = 0; j < n4; j += 4) {
        const __m256d b = _mm256_loadu_pd(brow + j);
        const __m256d p = _mm256_mul_pd(alv, b);
        const __m256d q = _mm256_mul_pd(ahv, b);
        _mm256_storeu_pd(clo + j, _mm256_add_pd(_mm256_loadu_pd(clo + j),
                                                _mm256_min_pd(p, q)));
        _mm256_storeu_pd(chi + j, _mm256_add_pd(_mm256_loadu_pd(chi + j),
                                                _mm256_max_pd(p, q)));
      }
      for (int j = n4; j < n; ++j) {
        const double p = alo[l] * brow[j];
        const double q = ahi[l] * brow[j];
        clo[j] += vmin(p, q);
        chi[j] += vmax(p, q);
      }
    }
  }
}

}  // namespace

const Kernels& avx2_kernels() {
  static const Kernels k = {
      "avx2", v_matmul,    v_add,          v_sub,
      v_mul,  v_iv_mul,    v_iv_matmul,    v_iv_matmul_dgb,
  };
  return k;
}

}  // namespace ivsid::kern

#endif  // x86
