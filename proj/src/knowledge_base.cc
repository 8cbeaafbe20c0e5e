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

#include "fetel/knowledge_base.h"

#include <json.hpp>

#include "fetel/error.h"
#include "fetel/text.h"

namespace fetel {

using nlohmann::json;

namespace {

constexpr const char *kSnapshotMagic = "fetel-kb";

}  // namespace

bool AnchorStatistics::Add(std::string_view surface, std::string_view entity_id,
                           uint64_t count) {
  std::string normalized = NormalizeSurface(surface);
  if (normalized.empty() || entity_id.empty() || count == 0) return false;
  counts_[normalized][std::string(entity_id)] += count;
  totals_[normalized] += count;
  return true;
}

void AnchorStatistics::Merge(const AnchorStatistics &other) {
  for (const auto &[surface, candidates] : other.counts_) {
    for (const auto &[entity, count] : candidates) {
      counts_[surface][entity] += count;
    }
  }
  for (const auto &[surface, total] : other.totals_) totals_[surface] += total;
}

const AnchorStatistics::Candidates *AnchorStatistics::Find(
    std::string_view surface) const {
  auto it = counts_.find(NormalizeSurface(surface));
  return it == counts_.end() ? nullptr : &it->second;
}

uint64_t AnchorStatistics::Total(std::string_view surface) const {
  auto it = totals_.find(NormalizeSurface(surface));
  return it == totals_.end() ? 0 : it->second;
}

double AnchorStatistics::Commonness(std::string_view surface,
                                    std::string_view entity_id) const {
  const std::string normalized = NormalizeSurface(surface);
  auto it = counts_.find(normalized);
  if (it == counts_.end()) return 0.0;
  auto entity = it->second.find(entity_id);
  if (entity == it->second.end()) return 0.0;
  return static_cast<double>(entity->second) /
         static_cast<double>(totals_.find(normalized)->second);
}

AnchorStatistics IngestAnchors(std::span<const AnchorPair> pairs,
                               IngestReport *report) {
  AnchorStatistics stats;
  IngestReport local;
  for (const auto &[surface, entity] : pairs) {
    ++local.pairs_read;
    if (entity.empty()) {
      ++local.empty_entities;
    } else if (!stats.Add(surface, entity)) {
      ++local.empty_surfaces;
    } else {
      ++local.pairs_ingested;
    }
  }
  if (report != nullptr) *report = local;
  return stats;
}

AnchorStatistics IngestAnchorFile(const std::string &path,
                                  IngestReport *report) {
  std::ifstream in = OpenForRead(path);
  AnchorStatistics stats;
  IngestReport local;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++local.pairs_read;
    const size_t tab = line.rfind('\t');
    std::string_view entity =
        tab == std::string::npos ? std::string_view() : Trim(std::string_view(line).substr(tab + 1));
    if (entity.empty()) {
      ++local.empty_entities;
      continue;
    }
    if (!stats.Add(std::string_view(line).substr(0, tab), entity)) {
      ++local.empty_surfaces;
      continue;
    }
    ++local.pairs_ingested;
  }
  if (report != nullptr) *report = local;
  return stats;
}

void KnowledgeBase::AddEntity(EntityRecord record) {
  if (record.id.empty()) {
    throw Error(ErrorCode::kSchemaViolation, "entity with empty id");
  }
  std::string id = record.id;
  if (!entities_.emplace(std::move(id), std::move(record)).second) {
    throw Error(ErrorCode::kSchemaViolation, "duplicate entity id");
  }
}

void KnowledgeBase::LoadEntities(const std::string &path) {
  std::ifstream in = OpenForRead(path);
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (Trim(line).empty()) continue;
    const std::string where = path + ":" + std::to_string(line_number);
    json record = json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object() ||
        !record.contains("id") || !record["id"].is_string()) {
      throw Error(ErrorCode::kSchemaViolation, where + ": expected {\"id\": str, ...}");
    }
    EntityRecord entity;
    entity.id = record["id"].get<std::string>();
    if (record.contains("title") && record["title"].is_string()) {
      entity.title = record["title"].get<std::string>();
    }
    if (record.contains("types")) {
      if (!record["types"].is_array()) {
        throw Error(ErrorCode::kSchemaViolation, where + ": types must be a list");
      }
      for (const json &type : record["types"]) {
        if (!type.is_string()) {
          throw Error(ErrorCode::kSchemaViolation, where + ": non-string type");
        }
        entity.kb_types.push_back(type.get<std::string>());
      }
    }
    try {
      AddEntity(std::move(entity));
    } catch (const Error &e) {
      throw Error(ErrorCode::kSchemaViolation, where + ": " + e.detail());
    }
  }
}

const EntityRecord *KnowledgeBase::FindEntity(std::string_view id) const {
  auto it = entities_.find(id);
  return it == entities_.end() ? nullptr : &it->second;
}

const EntityRecord &KnowledgeBase::Entity(std::string_view id) const {
  const EntityRecord *record = FindEntity(id);
  if (record == nullptr) {
    throw Error(ErrorCode::kUnknownEntity, std::string(id));
  }
  return *record;
}

void KnowledgeBase::AnnotatePersons(const KbTypeMapping &mapping) {
  static const TypePath kPerson = TypePath::Parse("/person");
  for (auto &[id, entity] : entities_) {
    entity.is_person = mapping.Map(entity.kb_types).count(kPerson) > 0;
  }
}

void KnowledgeBase::SaveSnapshot(const std::string &path) const {
  std::ofstream out = OpenForWrite(path);
  json header = {{"format", kSnapshotMagic},
                 {"version", kSnapshotVersion},
                 {"entities", entities_.size()},
                 {"surfaces", anchors_.num_surfaces()}};
  out << header.dump() << "\n";
  for (const auto &[id, entity] : entities_) {
    json record = {{"id", entity.id},
                   {"title", entity.title},
                   {"types", entity.kb_types},
                   {"is_person", entity.is_person}};
    out << record.dump() << "\n";
  }
  for (const auto &[surface, candidates] : anchors_.counts()) {
    json counts = json::array();
    for (const auto &[entity, count] : candidates) {
      counts.push_back(json::array({entity, count}));
    }
    out << json({{"surface", surface}, {"counts", counts}}).dump() << "\n";
  }
  json trailer = {{"end", kSnapshotMagic},
                  {"entities", entities_.size()},
                  {"surfaces", anchors_.num_surfaces()}};
  out << trailer.dump() << "\n";
  out.flush();
  if (!out) throw Error(ErrorCode::kIoFailure, "write failed: " + path);
}

KnowledgeBase KnowledgeBase::LoadSnapshot(const std::string &path) {
  std::ifstream in = OpenForRead(path);
  auto read_record = [&](const char *what) {
    std::string line;
    if (!std::getline(in, line)) {
      throw Error(ErrorCode::kIoFailure,
                  path + ": truncated snapshot (missing " + what + ")");
    }
    json record = json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object()) {
      throw Error(ErrorCode::kIoFailure,
                  path + ": corrupt snapshot record (" + what + ")");
    }
    return record;
  };

  json header = read_record("header");
  if (header.value("format", "") != kSnapshotMagic ||
      !header.contains("version") || !header["version"].is_number_integer()) {
    throw Error(ErrorCode::kFormatVersionMismatch,
                path + ": not a knowledge base snapshot");
  }
  if (header["version"].get<int>() != kSnapshotVersion) {
    throw Error(ErrorCode::kFormatVersionMismatch,
                path + ": snapshot version " +
                    std::to_string(header["version"].get<int>()) +
                    ", expected " + std::to_string(kSnapshotVersion));
  }
  const size_t num_entities = header.value("entities", size_t{0});
  const size_t num_surfaces = header.value("surfaces", size_t{0});

  KnowledgeBase kb;
  try {
    for (size_t i = 0; i < num_entities; ++i) {
      json record = read_record("entity");
      EntityRecord entity;
      entity.id = record.at("id").get<std::string>();
      entity.title = record.at("title").get<std::string>();
      entity.kb_types = record.at("types").get<std::vector<std::string>>();
      entity.is_person = record.at("is_person").get<bool>();
      kb.AddEntity(std::move(entity));
    }
    for (size_t i = 0; i < num_surfaces; ++i) {
      json record = read_record("surface");
      const std::string surface = record.at("surface").get<std::string>();
      for (const json &pair : record.at("counts")) {
        if (!kb.anchors_.Add(surface, pair.at(0).get<std::string>(),
                             pair.at(1).get<uint64_t>())) {
          throw Error(ErrorCode::kIoFailure, path + ": invalid anchor count");
        }
      }
    }
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kIoFailure, path + ": corrupt snapshot: " + e.what());
  }
  json trailer = read_record("trailer");
  if (trailer.value("end", "") != kSnapshotMagic ||
      trailer.value("entities", size_t{0}) != num_entities ||
      trailer.value("surfaces", size_t{0}) != num_surfaces) {
    throw Error(ErrorCode::kIoFailure, path + ": snapshot trailer mismatch");
  }
  return kb;
}

}  // namespace fetel
