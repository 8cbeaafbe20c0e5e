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

#ifndef FETEL_TESTS_SUPPORT_GRADIENT_CHECK_H_
#define FETEL_TESTS_SUPPORT_GRADIENT_CHECK_H_

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fetel/nn.h"
#include "fetel/typing_model.h"

namespace fetel::testing {

struct GradientCheckStats {
  size_t checked = 0;
  // Coordinates whose finite-difference stencil crossed a ReLU or hinge kink.
  size_t skipped_kinks = 0;
  double worst_relative = 0.0;
  std::string worst_parameter;
};

// Compares analytic gradients of the mean weighted hinge loss (training-mode
// forward, normalization statistics frozen) against a fourth-order central
// difference. Relative error is |a - n| / max(|a|, |n|, 1e-6).
GradientCheckStats CheckModelGradients(
    TypingModel &model, std::span<const MentionFeatures> batch,
    const std::vector<std::vector<double>> &gold_bits,
    std::span<const double> weights,
    const std::function<bool(const nn::Parameter &)> &select);

}  // namespace fetel::testing

#endif  // FETEL_TESTS_SUPPORT_GRADIENT_CHECK_H_
