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

#include "support/gradient_check.h"

#include <algorithm>
#include <cmath>

#include "fetel/random.h"
#include "fetel/training.h"

namespace fetel::testing {
namespace {

struct Evaluation {
  double loss = 0.0;
  // Which side of every ReLU and hinge kink the evaluation landed on.
  std::vector<bool> pattern;
};

}  // namespace

GradientCheckStats CheckModelGradients(
    TypingModel &model, std::span<const MentionFeatures> batch,
    const std::vector<std::vector<double>> &gold_bits,
    std::span<const double> weights,
    const std::function<bool(const nn::Parameter &)> &select) {
  const size_t n = batch.size();
  const double scale = 1.0 / static_cast<double>(n);
  std::vector<double> scratch(model.num_types());

  auto evaluate = [&](TypingModel::Cache &cache) {
    Rng rng(0);
    Matrix scores = model.ForwardTrain(batch, rng, cache, false);
    Evaluation e;
    for (size_t b = 0; b < n; ++b) {
      e.loss += HingeLossWithGradient(scores.row(b), gold_bits[b], weights, scale, scratch);
      for (double s : scores.row(b)) {
        e.pattern.push_back(s < 1.0);
        e.pattern.push_back(s > -1.0);
      }
    }
    e.loss *= scale;
    for (size_t l = 0; l + 1 < cache.activations.size(); ++l) {
      for (double a : cache.activations[l].values()) e.pattern.push_back(a > 0.0);
    }
    return e;
  };

  model.ZeroGrad();
  TypingModel::Cache cache;
  Rng rng(0);
  Matrix scores = model.ForwardTrain(batch, rng, cache, false);
  Matrix d_scores(n, model.num_types());
  for (size_t b = 0; b < n; ++b) {
    HingeLossWithGradient(scores.row(b), gold_bits[b], weights, scale, d_scores.row(b));
  }
  model.Backward(cache, d_scores);
  const Evaluation base = evaluate(cache);

  GradientCheckStats stats;
  const double h = 1e-4;
  for (nn::Parameter *p : model.Parameters()) {
    if (!p->trainable || !select(*p)) continue;
    for (size_t i = 0; i < p->value.size(); ++i) {
      double &x = p->value.data()[i];
      const double saved = x;
      double f[4];
      bool kink = false;
      const double offsets[4] = {2 * h, h, -h, -2 * h};
      for (int s = 0; s < 4; ++s) {
        x = saved + offsets[s];
        TypingModel::Cache c;
        const Evaluation e = evaluate(c);
        f[s] = e.loss;
        kink |= e.pattern != base.pattern;
      }
      x = saved;
      if (kink) {
        ++stats.skipped_kinks;
        continue;
      }
      const double numeric = (-f[0] + 8 * f[1] - 8 * f[2] + f[3]) / (12 * h);
      const double analytic = p->grad.data()[i];
      const double rel = std::abs(numeric - analytic) /
                         std::max({std::abs(numeric), std::abs(analytic), 1e-6});
      ++stats.checked;
      if (rel > stats.worst_relative) {
        stats.worst_relative = rel;
        stats.worst_parameter = p->name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return stats;
}

}  // namespace fetel::testing
