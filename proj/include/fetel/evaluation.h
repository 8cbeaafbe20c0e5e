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

#ifndef FETEL_EVALUATION_H_
#define FETEL_EVALUATION_H_

#include <span>
#include <vector>

#include <json.hpp>

#include "fetel/knowledge_base.h"
#include "fetel/mention.h"
#include "fetel/tensor.h"
#include "fetel/type_system.h"
#include "fetel/typing_model.h"

namespace fetel {

struct LabelPair {
  TypeSet gold;
  TypeSet predicted;
};

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Harmonic mean, 0 when both inputs are 0.
double HarmonicMean(double precision, double recall);

// All three throw EmptyEvaluation on an empty list.
double StrictAccuracy(std::span<const LabelPair> pairs);
// Means of per-mention precision and recall; an empty predicted set has
// precision 0.
PrecisionRecall MacroF1(std::span<const LabelPair> pairs);
// Ratios of summed intersection sizes.
PrecisionRecall MicroF1(std::span<const LabelPair> pairs);

struct EvalReport {
  double strict_accuracy = 0.0;
  PrecisionRecall macro;
  PrecisionRecall micro;
  size_t n_mentions = 0;
  std::vector<LabelPair> records;

  nlohmann::json ToJson(bool include_records = true) const;
};

EvalReport ComputeReport(std::vector<LabelPair> pairs);

struct Prediction {
  TypeSet labels;
  std::vector<double> scores;
  LinkResult link;
};

// Links (document-level coreference included), featurizes and scores every
// mention in evaluation mode.
std::vector<Prediction> Predict(const TypingModel &model,
                                std::span<const MentionExample> mentions,
                                const KnowledgeBase &kb,
                                const KbTypeMapping &mapping,
                                const TypeVocabulary &vocab,
                                DecodePolicy policy);

// Same as Predict with the links already computed.
std::vector<Prediction> PredictWithLinks(const TypingModel &model,
                                         std::span<const MentionExample> mentions,
                                         std::span<const LinkResult> links,
                                         const KnowledgeBase &kb,
                                         const KbTypeMapping &mapping,
                                         const TypeVocabulary &vocab,
                                         DecodePolicy policy);

// Throws EmptyEvaluation for an empty dataset.
EvalReport Evaluate(const TypingModel &model,
                    std::span<const MentionExample> dataset,
                    const KnowledgeBase &kb, const KbTypeMapping &mapping,
                    const TypeVocabulary &vocab, DecodePolicy policy);

}  // namespace fetel

#endif  // FETEL_EVALUATION_H_
