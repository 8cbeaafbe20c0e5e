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

#include "support/test_util.h"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

namespace fetel::testing {

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("fetel_test_" + std::to_string(::getpid()) + "_" +
           std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  // Set FETEL_KEEP_TEMP to inspect a failing test's files.
  if (std::getenv("FETEL_KEEP_TEMP") != nullptr) return;
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

void WriteText(const std::string &path, const std::string &contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << contents;
}

std::string ReadText(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TypePath T(const std::string &path) { return TypePath::Parse(path); }

TypeSet Types(std::initializer_list<const char *> paths) {
  TypeSet out;
  for (const char *p : paths) out.insert(TypePath::Parse(p));
  return out;
}

TypeVocabulary ToyVocabulary() {
  return TypeVocabulary({T("/person"), T("/person/politician"),
                         T("/person/tv_personality"), T("/person/business"),
                         T("/person/actor"), T("/location"), T("/location/city"),
                         T("/organization")});
}

KbTypeMapping ToyMapping(const TypeVocabulary &vocab) {
  KbTypeMapping mapping;
  mapping.Add("kb.politician", T("/person/politician"), vocab);
  mapping.Add("kb.tv_host", T("/person/tv_personality"), vocab);
  mapping.Add("kb.businessperson", T("/person/business"), vocab);
  mapping.Add("kb.actor", T("/person/actor"), vocab);
  mapping.Add("kb.city", T("/location/city"), vocab);
  mapping.Add("kb.company", T("/organization"), vocab);
  return mapping;
}

KnowledgeBase ToyKnowledgeBase() {
  KnowledgeBase kb;
  kb.AddEntity({"E1", "Donald Trump", {"kb.politician", "kb.tv_host", "kb.businessperson"}});
  kb.AddEntity({"E2", "Trump Tower", {"kb.company"}});
  kb.AddEntity({"E3", "Matt Damon", {"kb.actor"}});
  kb.AddEntity({"E4", "Federal Way", {"kb.city"}});
  kb.AddEntity({"E5", "Untyped", {}});
  AnchorStatistics &anchors = kb.anchors();
  anchors.Add("Trump", "E1", 3);
  anchors.Add("Trump", "E2");
  anchors.Add("Donald Trump", "E1");
  anchors.Add("Matt Damon", "E3");
  anchors.Add("Federal Way", "E4");
  const TypeVocabulary vocab = ToyVocabulary();
  kb.AnnotatePersons(ToyMapping(vocab));
  return kb;
}

}  // namespace fetel::testing
