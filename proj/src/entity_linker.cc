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

#include "fetel/entity_linker.h"

#include <algorithm>
#include <map>

#include "fetel/text.h"

namespace fetel {
namespace {

std::vector<std::string> NormalizedTokens(const MentionExample &mention) {
  std::vector<std::string> tokens;
  for (size_t i = mention.span.start; i < mention.span.end; ++i) {
    tokens.push_back(NormalizeSurface(mention.tokens[i]));
  }
  return tokens;
}

bool IsStrictContiguousRun(const std::vector<std::string> &needle,
                           const std::vector<std::string> &haystack) {
  if (needle.empty() || needle.size() >= haystack.size()) return false;
  return std::search(haystack.begin(), haystack.end(), needle.begin(),
                     needle.end()) != haystack.end();
}

}  // namespace

std::string MentionExample::Surface() const {
  std::string surface;
  for (size_t i = span.start; i < span.end && i < tokens.size(); ++i) {
    if (i > span.start) surface.push_back(' ');
    surface += tokens[i];
  }
  return surface;
}

LinkResult LinkMention(const KnowledgeBase &kb, std::string_view surface) {
  const AnchorStatistics::Candidates *candidates = kb.anchors().Find(surface);
  if (candidates == nullptr || candidates->empty()) {
    return LinkResult::Nil(std::string(surface));
  }
  // Candidates iterate in ascending id order, so strict '>' keeps the
  // smallest id among equal counts.
  const std::string *best = nullptr;
  uint64_t best_count = 0;
  for (const auto &[entity, count] : *candidates) {
    if (best == nullptr || count > best_count) {
      best = &entity;
      best_count = count;
    }
  }
  return LinkResult{*best, kb.anchors().Commonness(surface, *best),
                    std::string(surface)};
}

namespace {

// Mention tokens and direct link of every mention in a document, computed once.
struct DocumentIndex {
  std::vector<std::vector<std::string>> tokens;
  std::vector<LinkResult> links;

  DocumentIndex(const KnowledgeBase &kb,
                std::span<const MentionExample> mentions) {
    for (const MentionExample &mention : mentions) {
      if (!mention.HasValidSpan()) {
        tokens.emplace_back();
        links.push_back(LinkResult::Nil(mention.Surface()));
        continue;
      }
      tokens.push_back(NormalizedTokens(mention));
      links.push_back(LinkMention(kb, mention.Surface()));
    }
  }
};

std::string Resolve(const MentionExample &mention,
                    std::span<const MentionExample> document_mentions,
                    const DocumentIndex &index, const KnowledgeBase &kb) {
  if (!mention.HasValidSpan()) return mention.Surface();
  const std::vector<std::string> needle = NormalizedTokens(mention);
  const MentionExample *best = nullptr;
  double best_confidence = 0.0;
  for (size_t i = 0; i < document_mentions.size(); ++i) {
    if (!IsStrictContiguousRun(needle, index.tokens[i])) continue;
    const LinkResult &link = index.links[i];
    if (link.is_nil()) continue;
    const EntityRecord *entity = kb.FindEntity(*link.entity_id);
    if (entity == nullptr || !entity->is_person) continue;
    if (best == nullptr || link.confidence > best_confidence) {
      best = &document_mentions[i];
      best_confidence = link.confidence;
    }
  }
  return best == nullptr ? mention.Surface() : best->Surface();
}

}  // namespace

std::string ResolvePersonCoreference(
    const MentionExample &mention,
    std::span<const MentionExample> document_mentions,
    const KnowledgeBase &kb) {
  return Resolve(mention, document_mentions, DocumentIndex(kb, document_mentions),
                 kb);
}

std::vector<LinkResult> LinkInDocument(
    const KnowledgeBase &kb, std::span<const MentionExample> document_mentions) {
  const DocumentIndex index(kb, document_mentions);
  std::vector<LinkResult> results;
  results.reserve(document_mentions.size());
  for (const MentionExample &mention : document_mentions) {
    const std::string surface = Resolve(mention, document_mentions, index, kb);
    results.push_back(LinkMention(kb, surface));
  }
  return results;
}

std::vector<LinkResult> LinkCorpus(const KnowledgeBase &kb,
                                   std::span<const MentionExample> mentions) {
  std::map<std::string, std::vector<size_t>> documents;
  for (size_t i = 0; i < mentions.size(); ++i) {
    documents[mentions[i].doc_id].push_back(i);
  }
  std::vector<LinkResult> results(mentions.size());
  for (const auto &[doc_id, indices] : documents) {
    std::vector<MentionExample> group;
    group.reserve(indices.size());
    for (size_t i : indices) group.push_back(mentions[i]);
    std::vector<LinkResult> links = LinkInDocument(kb, group);
    for (size_t j = 0; j < indices.size(); ++j) {
      results[indices[j]] = std::move(links[j]);
    }
  }
  return results;
}

}  // namespace fetel
