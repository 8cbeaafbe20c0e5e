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

#ifndef FETEL_CORPUS_H_
#define FETEL_CORPUS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fetel/knowledge_base.h"
#include "fetel/mention.h"
#include "fetel/tensor.h"
#include "fetel/type_system.h"

namespace fetel {

// Pretrained word vectors plus the dedicated unknown-word and mention-token
// vectors.
class EmbeddingTable {
 public:
  static constexpr size_t kUnknown = static_cast<size_t>(-1);

  EmbeddingTable() = default;
  // Builds a table from explicit rows; unk and mention vectors are drawn from
  // uniform(-0.1, 0.1) with `seed`.
  EmbeddingTable(std::vector<std::string> words, Matrix vectors, uint64_t seed);

  // `word v1 ... vd` per line; the dimension is taken from the first line.
  // Throws IoFailure or DimensionMismatch (naming the line).
  static EmbeddingTable Load(const std::string &path, uint64_t seed);

  size_t dimension() const { return vectors_.cols(); }
  size_t num_words() const { return words_.size(); }
  const std::vector<std::string> &words() const { return words_; }

  // Exact match, then lowercase match, then kUnknown.
  size_t Find(std::string_view word) const;
  // Vector for a row index or kUnknown.
  std::span<const double> Row(size_t index) const;
  std::span<const double> Lookup(std::string_view word) const {
    return Row(Find(word));
  }

  const std::vector<double> &unk_vector() const { return unk_; }
  const std::vector<double> &mention_vector() const { return mention_; }
  void set_unk_vector(std::vector<double> v);
  void set_mention_vector(std::vector<double> v);

 private:
  void InitSpecialVectors(uint64_t seed);

  std::vector<std::string> words_;
  std::unordered_map<std::string, size_t> index_;
  Matrix vectors_;
  std::vector<double> unk_;
  std::vector<double> mention_;
};

struct Anchor {
  TokenSpan span;
  std::string target;
};

struct AnchorDocument {
  std::string doc_id;
  std::vector<std::string> tokens;
  std::vector<Anchor> anchors;
};

// JSON lines: {"doc_id": str, "tokens": [str], "anchors": [{"span": [s, e],
// "target": str}]}. Throws SchemaViolation with the record index.
std::vector<AnchorDocument> LoadAnchorDocuments(const std::string &path);

struct WeakLabelReport {
  size_t anchors = 0;
  size_t generated = 0;
  size_t dropped_empty_labels = 0;
  size_t skipped_unknown_entity = 0;
  size_t skipped_bad_span = 0;
};

// One example per anchor, labeled with the ancestor closure of the target
// entity's mapped KB types. Anchors whose labels come out empty, that point
// at unknown entities or that have invalid spans are skipped and tallied.
std::vector<MentionExample> GenerateWeakLabels(
    std::span<const AnchorDocument> documents, const KnowledgeBase &kb,
    const KbTypeMapping &mapping, const TypeVocabulary &vocab,
    WeakLabelReport *report = nullptr);

// Random partition into (train, dev) with exactly dev_size dev examples.
// Both parts keep the input order. Throws InsufficientData.
std::pair<std::vector<MentionExample>, std::vector<MentionExample>> SplitDev(
    std::vector<MentionExample> examples, size_t dev_size, uint64_t seed);

// Parses one mention record. Labels are closed under ancestors; unknown
// labels throw UnknownType and structural problems SchemaViolation.
MentionExample ParseMentionRecord(const nlohmann::json &record,
                                  const TypeVocabulary &vocab,
                                  size_t record_index, bool require_labels);
nlohmann::json MentionToJson(const MentionExample &mention);

std::vector<MentionExample> LoadDataset(const std::string &path,
                                        const TypeVocabulary &vocab,
                                        bool require_labels = true);
void SaveDataset(const std::string &path,
                 std::span<const MentionExample> examples);

}  // namespace fetel

#endif  // FETEL_CORPUS_H_
