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

#include "fetel/type_system.h"

#include <string>

#include "fetel/error.h"
#include "fetel/text.h"

namespace fetel {

TypePath TypePath::Parse(std::string_view raw) {
  auto fail = [&](const char *why) {
    return Error(ErrorCode::kMalformedTypePath,
                 "\"" + std::string(raw) + "\": " + why);
  };
  if (raw.empty()) throw fail("empty");
  if (raw.front() != '/') throw fail("missing leading '/'");
  std::string_view body = raw.substr(1);
  if (!body.empty() && body.back() == '/') body.remove_suffix(1);
  if (body.empty()) throw fail("no segments");
  std::vector<std::string> segments;
  for (std::string_view part : Split(body, '/')) {
    if (part.empty()) throw fail("empty segment");
    for (char c : part) {
      if (IsSpace(c)) throw fail("embedded whitespace");
    }
    segments.push_back(ToLower(part));
  }
  return TypePath(std::move(segments));
}

TypePath TypePath::Prefix(size_t depth) const {
  return TypePath(std::vector<std::string>(
      segments_.begin(), segments_.begin() + std::min(depth, segments_.size())));
}

std::optional<TypePath> TypePath::Parent() const {
  if (depth() < 2) return std::nullopt;
  return Prefix(depth() - 1);
}

bool TypePath::IsFinePerson() const {
  return depth() >= 2 && segments_[0] == "person";
}

std::string TypePath::ToString() const {
  std::string out;
  for (const std::string &segment : segments_) {
    out.push_back('/');
    out += segment;
  }
  return out;
}

TypeSet PrefixClosure(const TypeSet &labels) {
  TypeSet closed;
  for (const TypePath &label : labels) {
    for (size_t d = 1; d <= label.depth(); ++d) closed.insert(label.Prefix(d));
  }
  return closed;
}

std::vector<std::string> ToStrings(const TypeSet &labels) {
  std::vector<std::string> out;
  out.reserve(labels.size());
  for (const TypePath &label : labels) out.push_back(label.ToString());
  return out;
}

TypeVocabulary::TypeVocabulary(std::vector<TypePath> types)
    : types_(std::move(types)) {
  for (size_t i = 0; i < types_.size(); ++i) {
    if (!index_.emplace(types_[i], i).second) {
      throw Error(ErrorCode::kSchemaViolation,
                  "duplicate type " + types_[i].ToString());
    }
  }
  for (size_t i = 0; i < types_.size(); ++i) {
    if (auto parent = types_[i].Parent(); parent && !Contains(*parent)) {
      throw Error(ErrorCode::kSchemaViolation,
                  "type " + types_[i].ToString() + " lacks its parent " +
                      parent->ToString());
    }
    if (types_[i].IsFinePerson()) person_fine_types_.push_back(i);
  }
}

TypeVocabulary TypeVocabulary::Load(const std::string &path) {
  std::ifstream in = OpenForRead(path);
  std::vector<TypePath> types;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view trimmed = Trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    types.push_back(TypePath::Parse(trimmed));
  }
  return TypeVocabulary(std::move(types));
}

void TypeVocabulary::Save(const std::string &path) const {
  std::ofstream out = OpenForWrite(path);
  for (const TypePath &type : types_) out << type.ToString() << "\n";
  if (!out) throw Error(ErrorCode::kIoFailure, "write failed: " + path);
}

std::optional<size_t> TypeVocabulary::Find(const TypePath &type) const {
  auto it = index_.find(type);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

size_t TypeVocabulary::Index(const TypePath &type) const {
  auto it = index_.find(type);
  if (it == index_.end()) {
    throw Error(ErrorCode::kUnknownType, type.ToString());
  }
  return it->second;
}

TypeSet TypeVocabulary::ExpandWithAncestors(const TypeSet &labels) const {
  for (const TypePath &label : labels) Index(label);
  return PrefixClosure(labels);
}

std::vector<double> TypeVocabulary::OneHot(const TypeSet &labels) const {
  std::vector<double> bits(types_.size(), 0.0);
  for (const TypePath &label : labels) bits[Index(label)] = 1.0;
  return bits;
}

TypeSet TypeVocabulary::Decode(std::span<const double> bits) const {
  TypeSet labels;
  for (size_t i = 0; i < bits.size() && i < types_.size(); ++i) {
    if (bits[i] != 0.0) labels.insert(types_[i]);
  }
  return labels;
}

double TypeVocabulary::PenaltyWeight(const TypePath &type,
                                     double lambda_p) const {
  return types_[Index(type)].IsFinePerson() ? lambda_p : 1.0;
}

std::vector<double> TypeVocabulary::PenaltyWeights(double lambda_p) const {
  std::vector<double> weights(types_.size(), 1.0);
  for (size_t i : person_fine_types_) weights[i] = lambda_p;
  return weights;
}

KbTypeMapping KbTypeMapping::Load(const std::string &path,
                                  const TypeVocabulary &vocab) {
  std::ifstream in = OpenForRead(path);
  KbTypeMapping mapping;
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    std::string_view trimmed = Trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    auto fields = Split(trimmed, '\t');
    if (fields.size() != 2 || Trim(fields[0]).empty()) {
      throw Error(ErrorCode::kSchemaViolation,
                  path + ":" + std::to_string(line_number) +
                      ": expected kb_type<TAB>target_path");
    }
    mapping.Add(std::string(Trim(fields[0])), TypePath::Parse(Trim(fields[1])),
                vocab);
  }
  return mapping;
}

void KbTypeMapping::Save(const std::string &path) const {
  std::ofstream out = OpenForWrite(path);
  for (const auto &[kb_type, targets] : entries_) {
    for (const TypePath &target : targets) {
      out << kb_type << '\t' << target.ToString() << "\n";
    }
  }
  if (!out) throw Error(ErrorCode::kIoFailure, "write failed: " + path);
}

void KbTypeMapping::Add(const std::string &kb_type, const TypePath &target,
                        const TypeVocabulary &vocab) {
  vocab.Index(target);
  entries_[kb_type].insert(target);
}

const TypeSet &KbTypeMapping::Lookup(const std::string &kb_type) const {
  static const TypeSet kEmpty;
  auto it = entries_.find(kb_type);
  return it == entries_.end() ? kEmpty : it->second;
}

TypeSet KbTypeMapping::Map(std::span<const std::string> kb_types) const {
  TypeSet mapped;
  for (const std::string &kb_type : kb_types) {
    const TypeSet &targets = Lookup(kb_type);
    mapped.insert(targets.begin(), targets.end());
  }
  return PrefixClosure(mapped);
}

}  // namespace fetel
