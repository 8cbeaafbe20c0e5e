// Copyright 2026 The Fetel Authors.
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

#include <immintrin.h>

#include <algorithm>
#include <cstring>
#include <vector>

#include "internal.h"

namespace fetel::kernels::internal {
namespace {

constexpr size_t kMr = 4;
constexpr size_t kNr = 8;
constexpr size_t kKc = 256;
constexpr size_t kMc = 128;
constexpr size_t kNc = 1024;

double HorizontalSum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double Dot(const double *a, const double *b, size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4),
                           _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double sum = HorizontalSum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void Axpy(double alpha, const double *x, double *y, size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

// Packs op(A)[ic:ic+mc, pc:pc+kc] into row panels of kMr, zero padded.
void PackA(bool trans, const double *a, size_t lda, size_t ic, size_t mc,
           size_t pc, size_t kc, double *out) {
  for (size_t panel = 0; panel < mc; panel += kMr) {
    const size_t rows = std::min(kMr, mc - panel);
    for (size_t p = 0; p < kc; ++p) {
      for (size_t r = 0; r < kMr; ++r) {
        double value = 0.0;
        if (r < rows) {
          const size_t i = ic + panel + r, col = pc + p;
          value = trans ? a[col * lda + i] : a[i * lda + col];
        }
        *out++ = value;
      }
    }
  }
}

// Packs op(B)[pc:pc+kc, jc:jc+nc] into column panels of kNr, zero padded.
void PackB(bool trans, const double *b, size_t ldb, size_t pc, size_t kc,
           size_t jc, size_t nc, double *out) {
  for (size_t panel = 0; panel < nc; panel += kNr) {
    const size_t cols = std::min(kNr, nc - panel);
    for (size_t p = 0; p < kc; ++p) {
      const size_t row = pc + p;
      if (!trans && cols == kNr) {
        std::memcpy(out, b + row * ldb + jc + panel, kNr * sizeof(double));
        out += kNr;
        continue;
      }
      for (size_t c = 0; c < kNr; ++c) {
        double value = 0.0;
        if (c < cols) {
          const size_t j = jc + panel + c;
          value = trans ? b[j * ldb + row] : b[row * ldb + j];
        }
        *out++ = value;
      }
    }
  }
}

void MicroKernel(size_t kc, const double *ap, const double *bp, double alpha,
                 double *c, size_t ldc, size_t rows, size_t cols) {
  __m256d c00 = _mm256_setzero_pd(), c01 = _mm256_setzero_pd();
  __m256d c10 = _mm256_setzero_pd(), c11 = _mm256_setzero_pd();
  __m256d c20 = _mm256_setzero_pd(), c21 = _mm256_setzero_pd();
  __m256d c30 = _mm256_setzero_pd(), c31 = _mm256_setzero_pd();
  for (size_t p = 0; p < kc; ++p) {
    const __m256d b0 = _mm256_loadu_pd(bp);
    const __m256d b1 = _mm256_loadu_pd(bp + 4);
    __m256d a = _mm256_broadcast_sd(ap);
    c00 = _mm256_fmadd_pd(a, b0, c00);
    c01 = _mm256_fmadd_pd(a, b1, c01);
    a = _mm256_broadcast_sd(ap + 1);
    c10 = _mm256_fmadd_pd(a, b0, c10);
    c11 = _mm256_fmadd_pd(a, b1, c11);
    a = _mm256_broadcast_sd(ap + 2);
    c20 = _mm256_fmadd_pd(a, b0, c20);
    c21 = _mm256_fmadd_pd(a, b1, c21);
    a = _mm256_broadcast_sd(ap + 3);
    c30 = _mm256_fmadd_pd(a, b0, c30);
    c31 = _mm256_fmadd_pd(a, b1, c31);
    ap += kMr;
    bp += kNr;
  }
  const __m256d va = _mm256_set1_pd(alpha);
  __m256d acc[kMr][2] = {{c00, c01}, {c10, c11}, {c20, c21}, {c30, c31}};
  if (rows == kMr && cols == kNr) {
    for (size_t r = 0; r < kMr; ++r) {
      double *row = c + r * ldc;
      _mm256_storeu_pd(row, _mm256_fmadd_pd(va, acc[r][0], _mm256_loadu_pd(row)));
      _mm256_storeu_pd(row + 4,
                       _mm256_fmadd_pd(va, acc[r][1], _mm256_loadu_pd(row + 4)));
    }
    return;
  }
  alignas(32) double tile[kMr][kNr];
  for (size_t r = 0; r < kMr; ++r) {
    _mm256_store_pd(&tile[r][0], acc[r][0]);
    _mm256_store_pd(&tile[r][4], acc[r][1]);
  }
  for (size_t r = 0; r < rows; ++r) {
    for (size_t col = 0; col < cols; ++col) {
      c[r * ldc + col] += alpha * tile[r][col];
    }
  }
}

void Gemm(bool trans_a, bool trans_b, size_t m, size_t n, size_t k,
          double alpha, const double *a, size_t lda, const double *b,
          size_t ldb, double *c, size_t ldc) {
  if (m == 0 || n == 0 || k == 0) return;
  thread_local std::vector<double> packed_a;
  thread_local std::vector<double> packed_b;
  for (size_t jc = 0; jc < n; jc += kNc) {
    const size_t nc = std::min(kNc, n - jc);
    const size_t nc_padded = (nc + kNr - 1) / kNr * kNr;
    for (size_t pc = 0; pc < k; pc += kKc) {
      const size_t kc = std::min(kKc, k - pc);
      packed_b.resize(nc_padded * kc);
      PackB(trans_b, b, ldb, pc, kc, jc, nc, packed_b.data());
      for (size_t ic = 0; ic < m; ic += kMc) {
        const size_t mc = std::min(kMc, m - ic);
        const size_t mc_padded = (mc + kMr - 1) / kMr * kMr;
        packed_a.resize(mc_padded * kc);
        PackA(trans_a, a, lda, ic, mc, pc, kc, packed_a.data());
        for (size_t jr = 0; jr < nc; jr += kNr) {
          const double *bp = packed_b.data() + jr * kc;
          for (size_t ir = 0; ir < mc; ir += kMr) {
            const double *ap = packed_a.data() + ir * kc;
            MicroKernel(kc, ap, bp, alpha, c + (ic + ir) * ldc + jc + jr, ldc,
                        std::min(kMr, mc - ir), std::min(kNr, nc - jr));
          }
        }
      }
    }
  }
}

void Adam(double *param, const double *grad, double *m, double *v, size_t n,
          const AdamStep &step) {
  const __m256d b1 = _mm256_set1_pd(step.beta1);
  const __m256d b2 = _mm256_set1_pd(step.beta2);
  const __m256d one_minus_b1 = _mm256_set1_pd(1.0 - step.beta1);
  const __m256d one_minus_b2 = _mm256_set1_pd(1.0 - step.beta2);
  const __m256d bc1 = _mm256_set1_pd(step.bias_correction1);
  const __m256d bc2 = _mm256_set1_pd(step.bias_correction2);
  const __m256d lr = _mm256_set1_pd(step.learning_rate);
  const __m256d eps = _mm256_set1_pd(step.epsilon);
  size_t i = 0;
  // Written with separate multiplies and adds so results match the scalar
  // reference bit for bit.
  for (; i + 4 <= n; i += 4) {
    const __m256d g = _mm256_loadu_pd(grad + i);
    __m256d mi = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)),
                               _mm256_mul_pd(one_minus_b1, g));
    __m256d vi = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)),
                               _mm256_mul_pd(one_minus_b2, _mm256_mul_pd(g, g)));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    const __m256d m_hat = _mm256_div_pd(mi, bc1);
    const __m256d v_hat = _mm256_div_pd(vi, bc2);
    const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(v_hat), eps);
    const __m256d update = _mm256_div_pd(_mm256_mul_pd(lr, m_hat), denom);
    _mm256_storeu_pd(param + i, _mm256_sub_pd(_mm256_loadu_pd(param + i), update));
  }
  if (i < n) {
    ScalarTable().adam(param + i, grad + i, m + i, v + i, n - i, step);
  }
}

}  // namespace

const KernelTable &Avx2Table() {
  static const KernelTable table{"avx2", Dot, Axpy, Gemm, Adam};
  return table;
}

}  // namespace fetel::kernels::internal
