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

#include <cstdlib>
#include <string_view>

#include "fetel/kernels.h"
#include "internal.h"

namespace fetel::kernels {
namespace {

bool CpuHasAvx2() {
#if defined(FETEL_BUILD_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable *SelectDefault() {
  const char *forced = std::getenv("FETEL_KERNELS");
  if (forced != nullptr && std::string_view(forced) == "scalar") {
    return &ScalarKernels();
  }
  if (const KernelTable *avx2 = Avx2Kernels()) return avx2;
  return &ScalarKernels();
}

const KernelTable *&ActiveSlot() {
  static const KernelTable *active = SelectDefault();
  return active;
}

}  // namespace

const KernelTable &ScalarKernels() { return internal::ScalarTable(); }

const KernelTable *Avx2Kernels() {
#ifdef FETEL_BUILD_AVX2
  static const bool supported = CpuHasAvx2();
  if (supported) return &internal::Avx2Table();
#endif
  return nullptr;
}

const KernelTable &Active() { return *ActiveSlot(); }

void SetActive(const KernelTable &table) { ActiveSlot() = &table; }

}  // namespace fetel::kernels
