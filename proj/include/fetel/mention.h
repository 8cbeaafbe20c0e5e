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

#ifndef FETEL_MENTION_H_
#define FETEL_MENTION_H_

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fetel/type_system.h"

namespace fetel {

// Outcome of linking one mention. A NIL result has no entity and zero
// confidence; otherwise confidence is the commonness of the chosen entity.
struct LinkResult {
  std::optional<std::string> entity_id;
  double confidence = 0.0;
  std::string resolved_surface;

  bool is_nil() const { return !entity_id.has_value(); }

  static LinkResult Nil(std::string surface = {}) {
    return LinkResult{std::nullopt, 0.0, std::move(surface)};
  }

  bool operator==(const LinkResult &other) const = default;
};

// Half-open token range [start, end).
struct TokenSpan {
  size_t start = 0;
  size_t end = 0;

  size_t length() const { return end - start; }
  bool operator==(const TokenSpan &other) const = default;
};

struct MentionExample {
  std::string doc_id;
  std::vector<std::string> tokens;
  TokenSpan span;
  // Ancestor-closed; may be empty only for prediction inputs.
  TypeSet labels;
  std::optional<std::string> anchor_target;
  std::optional<LinkResult> link;

  // Mention tokens joined by single spaces.
  std::string Surface() const;
  bool HasValidSpan() const {
    return span.start < span.end && span.end <= tokens.size();
  }
};

}  // namespace fetel

#endif  // FETEL_MENTION_H_
