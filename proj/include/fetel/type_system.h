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

#ifndef FETEL_TYPE_SYSTEM_H_
#define FETEL_TYPE_SYSTEM_H_

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fetel {

// A hierarchical label such as /person/politician. Segments are lowercase and
// never contain '/' or whitespace.
class TypePath {
 public:
  // Parses and normalizes a canonical path. Throws MalformedTypePath.
  static TypePath Parse(std::string_view raw);

  const std::vector<std::string> &segments() const { return segments_; }
  size_t depth() const { return segments_.size(); }

  // The path truncated to its first `depth` segments (1 <= depth <= depth()).
  TypePath Prefix(size_t depth) const;
  std::optional<TypePath> Parent() const;

  // First segment "person" and depth >= 2.
  bool IsFinePerson() const;

  std::string ToString() const;

  auto operator<=>(const TypePath &other) const = default;
  bool operator==(const TypePath &other) const = default;

 private:
  explicit TypePath(std::vector<std::string> segments)
      : segments_(std::move(segments)) {}

  std::vector<std::string> segments_;
};

using TypeSet = std::set<TypePath>;

// Closes a label set under prefixes without consulting a vocabulary.
TypeSet PrefixClosure(const TypeSet &labels);

std::vector<std::string> ToStrings(const TypeSet &labels);

// The target tag set with a stable index per type.
class TypeVocabulary {
 public:
  TypeVocabulary() = default;

  // Validates distinctness and hierarchy closure.
  explicit TypeVocabulary(std::vector<TypePath> types);

  // One path per line; blank lines and lines starting with '#' are skipped.
  static TypeVocabulary Load(const std::string &path);
  void Save(const std::string &path) const;

  size_t size() const { return types_.size(); }
  const std::vector<TypePath> &types() const { return types_; }
  const TypePath &type(size_t index) const { return types_.at(index); }

  bool Contains(const TypePath &type) const { return index_.count(type) > 0; }
  std::optional<size_t> Find(const TypePath &type) const;
  // Throws UnknownType.
  size_t Index(const TypePath &type) const;

  // Indices of the fine-grained person types, ascending.
  const std::vector<size_t> &person_fine_types() const {
    return person_fine_types_;
  }

  // Throws UnknownType if any label is outside the vocabulary.
  TypeSet ExpandWithAncestors(const TypeSet &labels) const;

  // Indicator vector of length size(). Throws UnknownType.
  std::vector<double> OneHot(const TypeSet &labels) const;
  // Inverse of OneHot: every position holding a nonzero value.
  TypeSet Decode(std::span<const double> bits) const;

  // lambda_p for fine-grained person types, 1 otherwise. Throws UnknownType.
  double PenaltyWeight(const TypePath &type, double lambda_p) const;
  std::vector<double> PenaltyWeights(double lambda_p) const;

 private:
  std::vector<TypePath> types_;
  std::map<TypePath, size_t> index_;
  std::vector<size_t> person_fine_types_;
};

// Maps knowledge-base type identifiers onto target types. Lookups are total:
// unmapped identifiers contribute nothing.
class KbTypeMapping {
 public:
  KbTypeMapping() = default;

  // TSV `kb_type<TAB>target_path`; a KB type may appear on several lines.
  static KbTypeMapping Load(const std::string &path,
                            const TypeVocabulary &vocab);
  void Save(const std::string &path) const;

  // Throws UnknownType if the target is not in the vocabulary.
  void Add(const std::string &kb_type, const TypePath &target,
           const TypeVocabulary &vocab);

  const TypeSet &Lookup(const std::string &kb_type) const;

  // Union of the mapped targets, closed under ancestors.
  TypeSet Map(std::span<const std::string> kb_types) const;

  size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, TypeSet> entries_;
};

}  // namespace fetel

#endif  // FETEL_TYPE_SYSTEM_H_
