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

#ifndef FETEL_TRAINING_H_
#define FETEL_TRAINING_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "fetel/evaluation.h"
#include "fetel/knowledge_base.h"
#include "fetel/mention.h"
#include "fetel/nn.h"
#include "fetel/random.h"
#include "fetel/type_system.h"
#include "fetel/typing_model.h"

namespace fetel {

struct TrainingConfig {
  double lambda_p = 2.0;
  double nil_dropout_rate = 0.5;
  bool person_noise_enabled = true;
  size_t batch_size = 256;
  double learning_rate = 1e-3;
  size_t max_epochs = 50;
  size_t patience = 5;
  uint64_t seed = 1;
  double gradient_clip_norm = 5.0;
  DecodePolicy dev_policy = DecodePolicy::kMultiPath;

  // Throws InvalidConfig.
  void Validate() const;
  nlohmann::json ToJson() const;
  static TrainingConfig FromJson(const nlohmann::json &json);
};

// Margin loss of one mention: gold types are pushed above +1, the rest below
// -1 with weight lambda_p on fine-grained person types.
// Throws UnknownType for gold labels outside the vocabulary.
double HingeLoss(std::span<const double> scores, const TypeSet &gold,
                 const TypeVocabulary &vocab, double lambda_p);

// The same loss over an indicator vector and per-type weights; writes
// dLoss/dscores scaled by grad_scale into grad.
double HingeLossWithGradient(std::span<const double> scores,
                             std::span<const double> gold_bits,
                             std::span<const double> weights, double grad_scale,
                             std::span<double> grad);

// Adds one uniformly drawn fine-grained person type missing from the set,
// then closes it under ancestors. The set is returned unchanged for
// non-person entities or when every fine person type is already present.
TypeSet InjectPersonTypeNoise(const TypeSet &kb_label_set,
                              const EntityRecord &entity,
                              const TypeVocabulary &vocab, Rng &rng);

// Replaces each link by NIL with probability rate. Returns how many links
// are NIL afterwards because of this call.
size_t ApplyNilDropout(std::span<LinkResult> links, double rate, Rng &rng);

class AdamOptimizer {
 public:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  explicit AdamOptimizer(double learning_rate) : learning_rate_(learning_rate) {}

  void Step(std::span<nn::Parameter *const> params);

 private:
  double learning_rate_;
  uint64_t steps_ = 0;
  std::vector<Matrix> first_moment_;
  std::vector<Matrix> second_moment_;
};

// Scales gradients so their global norm is at most max_norm; returns the
// norm before scaling.
double ClipGradientNorm(std::span<nn::Parameter *const> params, double max_norm);

struct EpochLog {
  size_t epoch = 0;
  double loss = 0.0;  // mean per-mention training loss
  std::optional<EvalReport> dev;
  size_t nil_dropped = 0;
  size_t person_noised = 0;

  nlohmann::json ToJson() const;
};

struct TrainingResult {
  std::vector<EpochLog> log;
  size_t best_epoch = 0;
  double best_dev_strict = 0.0;
};

// Training-time feature builder: links are computed once, then every epoch
// resamples NIL dropout and person-type noise on top of them.
class TrainingFeaturizer {
 public:
  TrainingFeaturizer(const TypingModel &model, const KnowledgeBase &kb,
                     const KbTypeMapping &mapping, const TypeVocabulary &vocab,
                     std::span<const MentionExample> examples);

  struct Counts {
    size_t nil_dropped = 0;
    size_t person_noised = 0;
  };

  // Features for one epoch with dropout and noise drawn from rng.
  std::vector<MentionFeatures> Sample(double nil_rate, bool person_noise,
                                      Rng &rng, Counts *counts) const;

  const std::vector<LinkResult> &links() const { return links_; }
  const std::vector<MentionFeatures> &base() const { return base_; }

 private:
  const KnowledgeBase &kb_;
  const TypeVocabulary &vocab_;
  std::vector<LinkResult> links_;
  std::vector<TypeSet> kb_label_sets_;
  std::vector<MentionFeatures> base_;
};

class Trainer {
 public:
  Trainer(TypingModel &model, const KnowledgeBase &kb,
          const KbTypeMapping &mapping, const TypeVocabulary &vocab,
          const TrainingConfig &config);

  // Mini-batch training with dev-based model selection and early stopping.
  // The model ends holding the best epoch's parameters. Throws EmptyCorpus
  // or NonFiniteLoss.
  TrainingResult Train(std::span<const MentionExample> train_set,
                       std::span<const MentionExample> dev_set,
                       const std::function<void(const EpochLog &)> &on_epoch = {});

 private:
  TypingModel &model_;
  const KnowledgeBase &kb_;
  const KbTypeMapping &mapping_;
  const TypeVocabulary &vocab_;
  TrainingConfig config_;
};

}  // namespace fetel

#endif  // FETEL_TRAINING_H_
