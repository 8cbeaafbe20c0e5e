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

#ifndef FETEL_KERNELS_INTERNAL_H_
#define FETEL_KERNELS_INTERNAL_H_

#include "fetel/kernels.h"

namespace fetel::kernels::internal {

const KernelTable &ScalarTable();
#ifdef FETEL_BUILD_AVX2
const KernelTable &Avx2Table();
#endif

}  // namespace fetel::kernels::internal

#endif  // FETEL_KERNELS_INTERNAL_H_
