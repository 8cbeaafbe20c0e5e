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

#include "fetel/corpus.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>

#include "fetel/error.h"
#include "fetel/random.h"
#include "fetel/text.h"

namespace fetel {

using nlohmann::json;

EmbeddingTable::EmbeddingTable(std::vector<std::string> words, Matrix vectors,
                               uint64_t seed)
    : words_(std::move(words)), vectors_(std::move(vectors)) {
  if (vectors_.rows() != words_.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "one vector per word required");
  }
  for (size_t i = 0; i < words_.size(); ++i) index_.emplace(words_[i], i);
  InitSpecialVectors(seed);
}

void EmbeddingTable::InitSpecialVectors(uint64_t seed) {
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const size_t dim = dimension();
  auto draw = [&] {
    std::vector<double> v(dim);
    for (double &x : v) x = rng.Uniform(-0.1, 0.1);
    return v;
  };
  unk_ = draw();
  while (true) {
    mention_ = draw();
    bool collides = mention_ == unk_;
    for (size_t i = 0; i < words_.size() && !collides; ++i) {
      collides = std::equal(mention_.begin(), mention_.end(),
                            vectors_.row(i).begin());
    }
    if (!collides) break;
  }
}

namespace {

bool IsDigits(const std::string &s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isdigit(c) != 0;
  });
}

}  // namespace

EmbeddingTable EmbeddingTable::Load(const std::string &path, uint64_t seed) {
  std::ifstream in = OpenForRead(path);
  std::vector<std::string> words;
  std::vector<double> values;
  size_t dim = 0;
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> fields = SplitWhitespace(line);
    if (fields.empty()) continue;
    // word2vec text files start with a "count dim" line.
    if (line_number == 1 && fields.size() == 2 && IsDigits(fields[0]) && IsDigits(fields[1])) {
      continue;
    }
    const size_t found = fields.size() - 1;
    if (words.empty()) {
      if (found == 0) {
        throw Error(ErrorCode::kDimensionMismatch,
                    path + ":" + std::to_string(line_number) + ": no values");
      }
      dim = found;
    } else if (found != dim) {
      throw Error(ErrorCode::kDimensionMismatch,
                  path + ":" + std::to_string(line_number) + ": expected " +
                      std::to_string(dim) + " values, found " +
                      std::to_string(found));
    }
    for (size_t i = 1; i < fields.size(); ++i) {
      double value = 0.0;
      const std::string &field = fields[i];
      auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
      if (ec != std::errc() || end != field.data() + field.size()) {
        throw Error(ErrorCode::kDimensionMismatch,
                    path + ":" + std::to_string(line_number) +
                        ": non-numeric value \"" + field + "\"");
      }
      values.push_back(value);
    }
    words.push_back(std::move(fields[0]));
  }
  if (words.empty()) {
    throw Error(ErrorCode::kDimensionMismatch, path + ": no embeddings");
  }
  Matrix vectors(words.size(), dim);
  std::copy(values.begin(), values.end(), vectors.data());
  return EmbeddingTable(std::move(words), std::move(vectors), seed);
}

size_t EmbeddingTable::Find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it != index_.end()) return it->second;
  it = index_.find(ToLower(word));
  if (it != index_.end()) return it->second;
  return kUnknown;
}

std::span<const double> EmbeddingTable::Row(size_t index) const {
  if (index == kUnknown) return unk_;
  return vectors_.row(index);
}

void EmbeddingTable::set_unk_vector(std::vector<double> v) {
  if (v.size() != dimension()) {
    throw Error(ErrorCode::kDimensionMismatch, "unk vector size");
  }
  unk_ = std::move(v);
}

void EmbeddingTable::set_mention_vector(std::vector<double> v) {
  if (v.size() != dimension()) {
    throw Error(ErrorCode::kDimensionMismatch, "mention vector size");
  }
  mention_ = std::move(v);
}

namespace {

std::string RecordWhere(const std::string &source, size_t index) {
  return source + " record " + std::to_string(index);
}

TokenSpan ParseSpan(const json &value, size_t num_tokens,
                    const std::string &where) {
  if (!value.is_array() || value.size() != 2 || !value[0].is_number_integer() ||
      !value[1].is_number_integer()) {
    throw Error(ErrorCode::kSchemaViolation, where + ": span must be [start, end]");
  }
  const int64_t start = value[0].get<int64_t>();
  const int64_t end = value[1].get<int64_t>();
  if (start < 0 || end <= start || static_cast<size_t>(end) > num_tokens) {
    throw Error(ErrorCode::kSchemaViolation,
                where + ": span [" + std::to_string(start) + ", " +
                    std::to_string(end) + ") outside " +
                    std::to_string(num_tokens) + " tokens");
  }
  return {static_cast<size_t>(start), static_cast<size_t>(end)};
}

std::vector<std::string> ParseTokens(const json &record,
                                     const std::string &where) {
  if (!record.contains("tokens") || !record["tokens"].is_array()) {
    throw Error(ErrorCode::kSchemaViolation, where + ": tokens must be a list");
  }
  std::vector<std::string> tokens;
  for (const json &token : record["tokens"]) {
    if (!token.is_string()) {
      throw Error(ErrorCode::kSchemaViolation, where + ": non-string token");
    }
    tokens.push_back(token.get<std::string>());
  }
  if (tokens.empty()) {
    throw Error(ErrorCode::kSchemaViolation, where + ": empty token list");
  }
  return tokens;
}

std::string ParseDocId(const json &record, const std::string &where) {
  if (!record.contains("doc_id")) return {};
  if (!record["doc_id"].is_string()) {
    throw Error(ErrorCode::kSchemaViolation, where + ": doc_id must be a string");
  }
  return record["doc_id"].get<std::string>();
}

template <typename Fn>
void ForEachJsonLine(const std::string &path, Fn fn) {
  std::ifstream in = OpenForRead(path);
  std::string line;
  size_t index = 0;
  while (std::getline(in, line)) {
    if (Trim(line).empty()) continue;
    json record = json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object()) {
      throw Error(ErrorCode::kSchemaViolation,
                  RecordWhere(path, index) + ": not a JSON object");
    }
    fn(record, index++);
  }
}

}  // namespace

std::vector<AnchorDocument> LoadAnchorDocuments(const std::string &path) {
  std::vector<AnchorDocument> documents;
  ForEachJsonLine(path, [&](const json &record, size_t index) {
    const std::string where = RecordWhere(path, index);
    AnchorDocument document;
    document.doc_id = ParseDocId(record, where);
    document.tokens = ParseTokens(record, where);
    if (record.contains("anchors")) {
      if (!record["anchors"].is_array()) {
        throw Error(ErrorCode::kSchemaViolation, where + ": anchors must be a list");
      }
      for (const json &anchor : record["anchors"]) {
        if (!anchor.is_object() || !anchor.contains("span") ||
            !anchor.contains("target") || !anchor["target"].is_string()) {
          throw Error(ErrorCode::kSchemaViolation,
                      where + ": anchor needs span and target");
        }
        const json &span = anchor["span"];
        if (!span.is_array() || span.size() != 2 ||
            !span[0].is_number_integer() || !span[1].is_number_integer()) {
          throw Error(ErrorCode::kSchemaViolation,
                      where + ": span must be [start, end]");
        }
        // Range problems are tallied by GenerateWeakLabels, not fatal here.
        const int64_t start = span[0].get<int64_t>();
        const int64_t end = span[1].get<int64_t>();
        if (start < 0 || end < 0) {
          throw Error(ErrorCode::kSchemaViolation, where + ": negative span");
        }
        document.anchors.push_back(
            {{static_cast<size_t>(start), static_cast<size_t>(end)},
             anchor["target"].get<std::string>()});
      }
    }
    documents.push_back(std::move(document));
  });
  return documents;
}

std::vector<MentionExample> GenerateWeakLabels(
    std::span<const AnchorDocument> documents, const KnowledgeBase &kb,
    const KbTypeMapping &mapping, const TypeVocabulary &vocab,
    WeakLabelReport *report) {
  WeakLabelReport local;
  std::vector<MentionExample> examples;
  for (const AnchorDocument &document : documents) {
    for (const Anchor &anchor : document.anchors) {
      ++local.anchors;
      if (anchor.span.start >= anchor.span.end ||
          anchor.span.end > document.tokens.size()) {
        ++local.skipped_bad_span;
        continue;
      }
      const EntityRecord *entity = kb.FindEntity(anchor.target);
      if (entity == nullptr) {
        ++local.skipped_unknown_entity;
        continue;
      }
      TypeSet labels = vocab.ExpandWithAncestors(mapping.Map(entity->kb_types));
      if (labels.empty()) {
        ++local.dropped_empty_labels;
        continue;
      }
      MentionExample example;
      example.doc_id = document.doc_id;
      example.tokens = document.tokens;
      example.span = anchor.span;
      example.labels = std::move(labels);
      example.anchor_target = anchor.target;
      examples.push_back(std::move(example));
      ++local.generated;
    }
  }
  if (report != nullptr) *report = local;
  return examples;
}

std::pair<std::vector<MentionExample>, std::vector<MentionExample>> SplitDev(
    std::vector<MentionExample> examples, size_t dev_size, uint64_t seed) {
  if (dev_size > examples.size()) {
    throw Error(ErrorCode::kInsufficientData,
                "dev size " + std::to_string(dev_size) + " exceeds " +
                    std::to_string(examples.size()) + " examples");
  }
  std::vector<size_t> order(examples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.Shuffle(order);
  std::vector<bool> in_dev(examples.size(), false);
  for (size_t i = 0; i < dev_size; ++i) in_dev[order[i]] = true;
  std::vector<MentionExample> train, dev;
  train.reserve(examples.size() - dev_size);
  dev.reserve(dev_size);
  for (size_t i = 0; i < examples.size(); ++i) {
    (in_dev[i] ? dev : train).push_back(std::move(examples[i]));
  }
  return {std::move(train), std::move(dev)};
}

MentionExample ParseMentionRecord(const json &record,
                                  const TypeVocabulary &vocab,
                                  size_t record_index, bool require_labels) {
  const std::string where = "record " + std::to_string(record_index);
  if (!record.is_object()) {
    throw Error(ErrorCode::kSchemaViolation, where + ": not a JSON object");
  }
  MentionExample example;
  example.doc_id = ParseDocId(record, where);
  example.tokens = ParseTokens(record, where);
  if (!record.contains("span")) {
    throw Error(ErrorCode::kSchemaViolation, where + ": missing span");
  }
  example.span = ParseSpan(record["span"], example.tokens.size(), where);
  if (record.contains("labels") && !record["labels"].is_null()) {
    if (!record["labels"].is_array()) {
      throw Error(ErrorCode::kSchemaViolation, where + ": labels must be a list");
    }
    TypeSet labels;
    for (const json &label : record["labels"]) {
      if (!label.is_string()) {
        throw Error(ErrorCode::kSchemaViolation, where + ": non-string label");
      }
      try {
        labels.insert(TypePath::Parse(label.get<std::string>()));
      } catch (const Error &e) {
        throw Error(ErrorCode::kSchemaViolation, where + ": " + e.detail());
      }
    }
    try {
      example.labels = vocab.ExpandWithAncestors(labels);
    } catch (const Error &e) {
      throw Error(ErrorCode::kUnknownType, where + ": " + e.detail());
    }
  }
  if (require_labels && example.labels.empty()) {
    throw Error(ErrorCode::kSchemaViolation, where + ": labels required");
  }
  if (record.contains("anchor_target") && !record["anchor_target"].is_null()) {
    if (!record["anchor_target"].is_string()) {
      throw Error(ErrorCode::kSchemaViolation,
                  where + ": anchor_target must be a string or null");
    }
    example.anchor_target = record["anchor_target"].get<std::string>();
  }
  return example;
}

json MentionToJson(const MentionExample &mention) {
  json record = {{"doc_id", mention.doc_id},
                 {"tokens", mention.tokens},
                 {"span", {mention.span.start, mention.span.end}},
                 {"labels", ToStrings(mention.labels)}};
  record["anchor_target"] = mention.anchor_target
                                ? json(*mention.anchor_target)
                                : json(nullptr);
  return record;
}

std::vector<MentionExample> LoadDataset(const std::string &path,
                                        const TypeVocabulary &vocab,
                                        bool require_labels) {
  std::vector<MentionExample> examples;
  std::ifstream in = OpenForRead(path);
  std::string line;
  size_t index = 0;
  while (std::getline(in, line)) {
    if (Trim(line).empty()) continue;
    json record = json::parse(line, nullptr, false);
    if (record.is_discarded()) {
      throw Error(ErrorCode::kSchemaViolation,
                  path + " record " + std::to_string(index) + ": invalid JSON");
    }
    try {
      examples.push_back(ParseMentionRecord(record, vocab, index, require_labels));
    } catch (const Error &e) {
      throw Error(e.code(), path + ": " + e.detail());
    }
    ++index;
  }
  return examples;
}

void SaveDataset(const std::string &path,
                 std::span<const MentionExample> examples) {
  std::ofstream out = OpenForWrite(path);
  for (const MentionExample &example : examples) {
    out << MentionToJson(example).dump() << "\n";
  }
  out.flush();
  if (!out) throw Error(ErrorCode::kIoFailure, "write failed: " + path);
}

}  // namespace fetel
