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

#ifndef FETEL_KNOWLEDGE_BASE_H_
#define FETEL_KNOWLEDGE_BASE_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fetel/type_system.h"

namespace fetel {

struct EntityRecord {
  std::string id;
  std::string title;
  std::vector<std::string> kb_types;
  // True iff the entity's mapped target types include /person.
  bool is_person = false;

  bool operator==(const EntityRecord &other) const = default;
};

struct IngestReport {
  size_t pairs_read = 0;
  size_t pairs_ingested = 0;
  size_t empty_surfaces = 0;
  size_t empty_entities = 0;
};

// Surface string -> entity co-occurrence counts from anchor links. Surfaces
// are stored normalized (trimmed, whitespace collapsed, lowercased).
class AnchorStatistics {
 public:
  using Candidates = std::map<std::string, uint64_t, std::less<>>;

  // Returns false (and changes nothing) for a surface that normalizes to the
  // empty string or an empty entity id.
  bool Add(std::string_view surface, std::string_view entity_id,
           uint64_t count = 1);
  void Merge(const AnchorStatistics &other);

  // counts[s][e] / totals[s]; 0 when the surface or pair is unseen.
  double Commonness(std::string_view surface, std::string_view entity_id) const;

  // Candidate entities for a surface, or nullptr when unseen.
  const Candidates *Find(std::string_view surface) const;
  uint64_t Total(std::string_view surface) const;

  size_t num_surfaces() const { return counts_.size(); }
  const std::map<std::string, Candidates, std::less<>> &counts() const {
    return counts_;
  }

  bool operator==(const AnchorStatistics &other) const = default;

 private:
  std::map<std::string, Candidates, std::less<>> counts_;
  std::map<std::string, uint64_t, std::less<>> totals_;
};

using AnchorPair = std::pair<std::string, std::string>;

AnchorStatistics IngestAnchors(std::span<const AnchorPair> pairs,
                               IngestReport *report = nullptr);

// Reads `surface<TAB>entity_id` lines.
AnchorStatistics IngestAnchorFile(const std::string &path,
                                  IngestReport *report = nullptr);

class KnowledgeBase {
 public:
  static constexpr int kSnapshotVersion = 1;

  // Throws SchemaViolation on a duplicate or empty id.
  void AddEntity(EntityRecord record);

  // JSON lines with fields id, title, types.
  void LoadEntities(const std::string &path);

  const EntityRecord *FindEntity(std::string_view id) const;
  // Throws UnknownEntity.
  const EntityRecord &Entity(std::string_view id) const;
  const std::vector<std::string> &EntityTypes(std::string_view id) const {
    return Entity(id).kb_types;
  }

  // Recomputes is_person for every entity from the mapping.
  void AnnotatePersons(const KbTypeMapping &mapping);

  AnchorStatistics &anchors() { return anchors_; }
  const AnchorStatistics &anchors() const { return anchors_; }

  size_t num_entities() const { return entities_.size(); }
  const std::map<std::string, EntityRecord, std::less<>> &entities() const {
    return entities_;
  }

  // Throws IoFailure.
  void SaveSnapshot(const std::string &path) const;
  // Throws IoFailure or FormatVersionMismatch; never returns a partial KB.
  static KnowledgeBase LoadSnapshot(const std::string &path);

  bool operator==(const KnowledgeBase &other) const = default;

 private:
  std::map<std::string, EntityRecord, std::less<>> entities_;
  AnchorStatistics anchors_;
};

}  // namespace fetel

#endif  // FETEL_KNOWLEDGE_BASE_H_
