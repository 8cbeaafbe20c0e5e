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

#include <cmath>
#include <cstring>
#include <vector>

#include <doctest.h>

#include "fetel/kernels.h"
#include "fetel/random.h"

using namespace fetel;
using namespace fetel::kernels;

namespace {

std::vector<double> RandomVector(Rng &rng, size_t n) {
  std::vector<double> v(n);
  for (double &x : v) x = rng.Uniform(-1.0, 1.0);
  return v;
}

// Naive triple loop used as the oracle for both kernel tables.
void NaiveGemm(bool ta, bool tb, size_t m, size_t n, size_t k, double alpha,
               const double *a, size_t lda, const double *b, size_t ldb,
               double *c, size_t ldc) {
  for (size_t i = 0; i < m; ++i) {
    for (size_t j = 0; j < n; ++j) {
      long double sum = 0;
      for (size_t p = 0; p < k; ++p) {
        const double av = ta ? a[p * lda + i] : a[i * lda + p];
        const double bv = tb ? b[j * ldb + p] : b[p * ldb + j];
        sum += static_cast<long double>(av) * bv;
      }
      c[i * ldc + j] += static_cast<double>(alpha * sum);
    }
  }
}

std::vector<const KernelTable *> Tables() {
  std::vector<const KernelTable *> tables = {&ScalarKernels()};
  if (Avx2Kernels() != nullptr) tables.push_back(Avx2Kernels());
  return tables;
}

}  // namespace

TEST_CASE("dot and axpy agree with the reference") {
  Rng rng(1);
  for (const KernelTable *table : Tables()) {
    CAPTURE(table->name);
    for (size_t n : {0, 1, 3, 4, 7, 8, 15, 16, 17, 31, 100, 1023}) {
      const auto a = RandomVector(rng, n), b = RandomVector(rng, n);
      long double expected = 0;
      for (size_t i = 0; i < n; ++i) expected += static_cast<long double>(a[i]) * b[i];
      CHECK(table->dot(a.data(), b.data(), n) ==
            doctest::Approx(static_cast<double>(expected)).epsilon(1e-12));

      auto y = RandomVector(rng, n), y_ref = y;
      table->axpy(0.37, a.data(), y.data(), n);
      for (size_t i = 0; i < n; ++i) y_ref[i] += 0.37 * a[i];
      for (size_t i = 0; i < n; ++i) CHECK(y[i] == doctest::Approx(y_ref[i]).epsilon(1e-14));
    }
  }
}

TEST_CASE("gemm agrees with the naive product for every transpose and shape") {
  Rng rng(2);
  const size_t shapes[][3] = {{1, 1, 1},   {3, 5, 7},     {4, 8, 16},  {5, 9, 3},
                              {17, 33, 65}, {130, 20, 260}, {2, 1030, 5}, {64, 64, 300}};
  for (const KernelTable *table : Tables()) {
    CAPTURE(table->name);
    for (const auto &shape : shapes) {
      const size_t m = shape[0], n = shape[1], k = shape[2];
      for (int ta = 0; ta < 2; ++ta) {
        for (int tb = 0; tb < 2; ++tb) {
          CAPTURE(m);
          CAPTURE(n);
          CAPTURE(k);
          CAPTURE(ta);
          CAPTURE(tb);
          // Leading dimensions padded by 3 to exercise strided access.
          const size_t lda = (ta ? m : k) + 3, ldb = (tb ? k : n) + 3, ldc = n + 3;
          const auto a = RandomVector(rng, (ta ? k : m) * lda);
          const auto b = RandomVector(rng, (tb ? n : k) * ldb);
          auto c = RandomVector(rng, m * ldc), c_ref = c;
          table->gemm(ta, tb, m, n, k, -0.5, a.data(), lda, b.data(), ldb, c.data(), ldc);
          NaiveGemm(ta, tb, m, n, k, -0.5, a.data(), lda, b.data(), ldb, c_ref.data(), ldc);
          double worst = 0;
          for (size_t i = 0; i < m; ++i) {
            for (size_t j = 0; j < n; ++j) {
              worst = std::max(worst, std::abs(c[i * ldc + j] - c_ref[i * ldc + j]));
            }
            // Padding columns are never touched.
            for (size_t j = n; j < ldc; ++j) CHECK(c[i * ldc + j] == c_ref[i * ldc + j]);
          }
          CHECK(worst < 1e-12 * static_cast<double>(k + 1));
        }
      }
    }
  }
}

TEST_CASE("adam update is bitwise identical across tables") {
  Rng rng(3);
  const AdamStep step{1e-3, 0.9, 0.999, 1e-8, 1 - 0.9 * 0.9, 1 - 0.999 * 0.999};
  for (size_t n : {1, 3, 4, 9, 64, 1001}) {
    const auto param = RandomVector(rng, n), grad = RandomVector(rng, n);
    auto m0 = RandomVector(rng, n), v0 = RandomVector(rng, n);
    for (double &v : v0) v = std::abs(v);
    for (const KernelTable *table : Tables()) {
      auto p = param, m = m0, v = v0;
      auto p_ref = param, m_ref = m0, v_ref = v0;
      table->adam(p.data(), grad.data(), m.data(), v.data(), n, step);
      ScalarKernels().adam(p_ref.data(), grad.data(), m_ref.data(), v_ref.data(), n, step);
      CHECK(std::memcmp(p.data(), p_ref.data(), n * sizeof(double)) == 0);
      CHECK(std::memcmp(m.data(), m_ref.data(), n * sizeof(double)) == 0);
      CHECK(std::memcmp(v.data(), v_ref.data(), n * sizeof(double)) == 0);
    }
    // The reference follows the textbook update.
    auto p = param, m = m0, v = v0;
    ScalarKernels().adam(p.data(), grad.data(), m.data(), v.data(), n, step);
    for (size_t i = 0; i < n; ++i) {
      const double mi = 0.9 * m0[i] + 0.1 * grad[i];
      const double vi = 0.999 * v0[i] + 0.001 * grad[i] * grad[i];
      const double expected = param[i] - 1e-3 * (mi / step.bias_correction1) /
                                             (std::sqrt(vi / step.bias_correction2) + 1e-8);
      CHECK(p[i] == doctest::Approx(expected).epsilon(1e-14));
    }
  }
}

TEST_CASE("active table can be switched") {
  const KernelTable &original = Active();
  SetActive(ScalarKernels());
  CHECK(Active().name == ScalarKernels().name);
  SetActive(original);
  CHECK(Active().name == original.name);
  if (Avx2Kernels() != nullptr) CHECK(Avx2Kernels()->name == "avx2");
}
