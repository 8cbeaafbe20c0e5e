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

#ifndef FETEL_KERNELS_H_
#define FETEL_KERNELS_H_

#include <cstddef>
#include <string_view>

// Dense double-precision arithmetic used by the model's inner loops. Every
// kernel has a portable scalar reference; vectorized variants are selected at
// runtime from what the CPU supports and must agree with the reference.
namespace fetel::kernels {

struct AdamStep {
  double learning_rate;
  double beta1;
  double beta2;
  double epsilon;
  // 1 - beta^t for the current step t.
  double bias_correction1;
  double bias_correction2;
};

struct KernelTable {
  std::string_view name;

  double (*dot)(const double *a, const double *b, size_t n);

  // y += alpha * x
  void (*axpy)(double alpha, const double *x, double *y, size_t n);

  // C[m x n] += alpha * op(A)[m x k] * op(B)[k x n], all row-major.
  // op(A) = A^T when trans_a, in which case A is stored as k x m.
  void (*gemm)(bool trans_a, bool trans_b, size_t m, size_t n, size_t k,
               double alpha, const double *a, size_t lda, const double *b,
               size_t ldb, double *c, size_t ldc);

  // In-place Adam update of n parameters.
  void (*adam)(double *param, const double *grad, double *m, double *v,
               size_t n, const AdamStep &step);
};

const KernelTable &ScalarKernels();

// Returns nullptr when the variant was not compiled in or the CPU lacks the
// required instruction set.
const KernelTable *Avx2Kernels();

// The active table. Defaults to the widest supported variant; the
// FETEL_KERNELS environment variable ("scalar" or "avx2") overrides it.
const KernelTable &Active();

// Replaces the active table. Not thread-safe; intended for startup and tests.
void SetActive(const KernelTable &table);

}  // namespace fetel::kernels

#endif  // FETEL_KERNELS_H_
