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

#include "fetel/evaluation.h"

#include <algorithm>

#include "fetel/entity_linker.h"
#include "fetel/error.h"

namespace fetel {

using nlohmann::json;

namespace {

constexpr size_t kScoringChunk = 256;

void RequireNonEmpty(std::span<const LabelPair> pairs) {
  if (pairs.empty()) throw Error(ErrorCode::kEmptyEvaluation, "no mentions");
}

size_t IntersectionSize(const TypeSet &a, const TypeSet &b) {
  size_t count = 0;
  for (const TypePath &t : a) count += b.count(t);
  return count;
}

}  // namespace

double HarmonicMean(double precision, double recall) {
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double StrictAccuracy(std::span<const LabelPair> pairs) {
  RequireNonEmpty(pairs);
  size_t exact = 0;
  for (const LabelPair &pair : pairs) exact += pair.gold == pair.predicted;
  return static_cast<double>(exact) / static_cast<double>(pairs.size());
}

PrecisionRecall MacroF1(std::span<const LabelPair> pairs) {
  RequireNonEmpty(pairs);
  double precision = 0.0, recall = 0.0;
  for (const LabelPair &pair : pairs) {
    const double hits = static_cast<double>(IntersectionSize(pair.gold, pair.predicted));
    if (!pair.predicted.empty()) {
      precision += hits / static_cast<double>(pair.predicted.size());
    }
    if (!pair.gold.empty()) recall += hits / static_cast<double>(pair.gold.size());
  }
  const double n = static_cast<double>(pairs.size());
  PrecisionRecall result{precision / n, recall / n, 0.0};
  result.f1 = HarmonicMean(result.precision, result.recall);
  return result;
}

PrecisionRecall MicroF1(std::span<const LabelPair> pairs) {
  RequireNonEmpty(pairs);
  size_t hits = 0, predicted = 0, gold = 0;
  for (const LabelPair &pair : pairs) {
    hits += IntersectionSize(pair.gold, pair.predicted);
    predicted += pair.predicted.size();
    gold += pair.gold.size();
  }
  PrecisionRecall result;
  if (predicted > 0) result.precision = static_cast<double>(hits) / static_cast<double>(predicted);
  if (gold > 0) result.recall = static_cast<double>(hits) / static_cast<double>(gold);
  result.f1 = HarmonicMean(result.precision, result.recall);
  return result;
}

json EvalReport::ToJson(bool include_records) const {
  json out = {{"strict_accuracy", strict_accuracy},
              {"macro_precision", macro.precision},
              {"macro_recall", macro.recall},
              {"macro_f1", macro.f1},
              {"micro_precision", micro.precision},
              {"micro_recall", micro.recall},
              {"micro_f1", micro.f1},
              {"n_mentions", n_mentions}};
  if (include_records) {
    json records = json::array();
    for (const LabelPair &pair : this->records) {
      records.push_back({{"gold", ToStrings(pair.gold)},
                         {"predicted", ToStrings(pair.predicted)},
                         {"exact_match", pair.gold == pair.predicted}});
    }
    out["records"] = std::move(records);
  }
  return out;
}

EvalReport ComputeReport(std::vector<LabelPair> pairs) {
  EvalReport report;
  report.strict_accuracy = StrictAccuracy(pairs);
  report.macro = MacroF1(pairs);
  report.micro = MicroF1(pairs);
  report.n_mentions = pairs.size();
  report.records = std::move(pairs);
  return report;
}

std::vector<Prediction> PredictWithLinks(const TypingModel &model,
                                         std::span<const MentionExample> mentions,
                                         std::span<const LinkResult> links,
                                         const KnowledgeBase &kb,
                                         const KbTypeMapping &mapping,
                                         const TypeVocabulary &vocab,
                                         DecodePolicy policy) {
  std::vector<Prediction> predictions;
  predictions.reserve(mentions.size());
  for (size_t start = 0; start < mentions.size(); start += kScoringChunk) {
    const size_t end = std::min(mentions.size(), start + kScoringChunk);
    std::vector<MentionFeatures> features;
    features.reserve(end - start);
    for (size_t i = start; i < end; ++i) {
      features.push_back(Featurize(mentions[i], links[i], kb, mapping, vocab,
                                   model.embeddings()));
    }
    Matrix scores = model.Score(features);
    for (size_t i = start; i < end; ++i) {
      auto row = scores.row(i - start);
      predictions.push_back({DecodePrediction(row, vocab, policy),
                             std::vector<double>(row.begin(), row.end()),
                             links[i]});
    }
  }
  return predictions;
}

std::vector<Prediction> Predict(const TypingModel &model,
                                std::span<const MentionExample> mentions,
                                const KnowledgeBase &kb,
                                const KbTypeMapping &mapping,
                                const TypeVocabulary &vocab,
                                DecodePolicy policy) {
  std::vector<LinkResult> links = LinkCorpus(kb, mentions);
  return PredictWithLinks(model, mentions, links, kb, mapping, vocab, policy);
}

EvalReport Evaluate(const TypingModel &model,
                    std::span<const MentionExample> dataset,
                    const KnowledgeBase &kb, const KbTypeMapping &mapping,
                    const TypeVocabulary &vocab, DecodePolicy policy) {
  if (dataset.empty()) throw Error(ErrorCode::kEmptyEvaluation, "empty dataset");
  std::vector<Prediction> predictions =
      Predict(model, dataset, kb, mapping, vocab, policy);
  std::vector<LabelPair> pairs;
  pairs.reserve(dataset.size());
  for (size_t i = 0; i < dataset.size(); ++i) {
    pairs.push_back({PrefixClosure(dataset[i].labels),
                     std::move(predictions[i].labels)});
  }
  return ComputeReport(std::move(pairs));
}

}  // namespace fetel
