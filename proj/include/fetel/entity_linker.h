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

#ifndef FETEL_ENTITY_LINKER_H_
#define FETEL_ENTITY_LINKER_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fetel/knowledge_base.h"
#include "fetel/mention.h"

namespace fetel {

// Links a surface to the candidate with the greatest commonness. Ties go to
// the lexicographically smallest entity id; unseen surfaces yield NIL.
LinkResult LinkMention(const KnowledgeBase &kb, std::string_view surface);

// Replaces a generic person mention ("Matt") by a longer mention in the same
// document ("Matt Damon") whose tokens contain it as a contiguous run and
// which links to a person. Among several such mentions the one with the
// highest link confidence wins, ties going to the earliest. Returns the
// mention's own surface when nothing qualifies.
std::string ResolvePersonCoreference(
    const MentionExample &mention,
    std::span<const MentionExample> document_mentions,
    const KnowledgeBase &kb);

// Coreference resolution followed by LinkMention for every mention of one
// document. Output order matches input order.
std::vector<LinkResult> LinkInDocument(
    const KnowledgeBase &kb, std::span<const MentionExample> document_mentions);

// Groups mentions by doc_id and links each group; results align with the
// input order.
std::vector<LinkResult> LinkCorpus(const KnowledgeBase &kb,
                                   std::span<const MentionExample> mentions);

}  // namespace fetel

#endif  // FETEL_ENTITY_LINKER_H_
