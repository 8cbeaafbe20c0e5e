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

#include <set>
#include <string>

#include <doctest.h>
#include <json.hpp>

#include "fetel/corpus.h"
#include "fetel/error.h"
#include "fetel/random.h"
#include "fetel/text.h"
#include "support/test_util.h"

using namespace fetel;
using fetel::testing::ToyKnowledgeBase;
using fetel::testing::ToyMapping;
using fetel::testing::ToyVocabulary;
using fetel::testing::TempDir;
using fetel::testing::Types;
using fetel::testing::WriteText;
using nlohmann::json;

namespace {

ErrorCode CodeOf(auto &&fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.code();
  }
  FAIL("expected fetel::Error");
  return ErrorCode::kInvalidConfig;
}

std::vector<std::string> Tokens(const std::string &s) {
  std::vector<std::string> out;
  for (std::string_view t : SplitWhitespace(s)) out.emplace_back(t);
  return out;
}

AnchorDocument TrumpDocument() {
  return {"trump",
          Tokens("On Tuesday , Donald Trump pledged to bring jobs back"),
          {{{3, 5}, "E1"}}};
}

}  // namespace

TEST_CASE("embedding file parsing") {
  TempDir dir;
  WriteText(dir.File("vec.txt"),
            "the 0.1 0.2 0.3 0.4\nCat 1 2 3 4\ndog -1 -2 -3 -4\n");
  const EmbeddingTable table = EmbeddingTable::Load(dir.File("vec.txt"), 1);
  CHECK(table.num_words() == 3);
  CHECK(table.dimension() == 4);
  CHECK(table.Lookup("dog")[2] == -3.0);
  CHECK(table.Find("cat") == EmbeddingTable::kUnknown);
  CHECK(table.Find("Cat") == 1);
  CHECK(table.Find("THE") == 0);  // lowercase fallback
  const auto unk = table.Lookup("zebra");
  CHECK(std::vector<double>(unk.begin(), unk.end()) == table.unk_vector());
  for (double v : table.unk_vector()) CHECK((v >= -0.1 && v < 0.1));
  CHECK(table.mention_vector() != table.unk_vector());

  WriteText(dir.File("w2v.txt"), "2 3\nthe 1 2 3\ncat 4 5 6\n");
  const EmbeddingTable w2v = EmbeddingTable::Load(dir.File("w2v.txt"), 1);
  CHECK(w2v.num_words() == 2);
  CHECK(w2v.dimension() == 3);
  CHECK(w2v.Lookup("cat")[0] == 4.0);

  WriteText(dir.File("ragged.txt"), "a 1 2 3\nb 1 2\n");
  try {
    EmbeddingTable::Load(dir.File("ragged.txt"), 1);
    FAIL("expected DimensionMismatch");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kDimensionMismatch);
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
  CHECK(CodeOf([&] { EmbeddingTable::Load(dir.File("none.txt"), 1); }) ==
        ErrorCode::kIoFailure);
}

TEST_CASE("special vectors are seeded") {
  Matrix rows(2, 3);
  const EmbeddingTable a({"x", "y"}, rows, 5), b({"x", "y"}, rows, 5), c({"x", "y"}, rows, 6);
  CHECK(a.unk_vector() == b.unk_vector());
  CHECK(a.mention_vector() == b.mention_vector());
  CHECK(a.unk_vector() != c.unk_vector());
}

TEST_CASE("weak labels follow the mapped KB types") {
  const TypeVocabulary vocab = ToyVocabulary();
  const KbTypeMapping mapping = ToyMapping(vocab);
  const KnowledgeBase kb = ToyKnowledgeBase();
  const std::vector<AnchorDocument> docs = {TrumpDocument()};
  WeakLabelReport report;
  const auto examples = GenerateWeakLabels(docs, kb, mapping, vocab, &report);
  REQUIRE(examples.size() == 1);
  CHECK(examples[0].labels == Types({"/person", "/person/politician",
                                     "/person/tv_personality", "/person/business"}));
  CHECK(examples[0].Surface() == "Donald Trump");
  CHECK(examples[0].anchor_target == "E1");
  CHECK(report.generated == 1);
}

TEST_CASE("weak labeling drops and tallies unusable anchors") {
  const TypeVocabulary vocab = ToyVocabulary();
  const KbTypeMapping mapping = ToyMapping(vocab);
  const KnowledgeBase kb = ToyKnowledgeBase();
  const std::vector<AnchorDocument> docs = {
      {"a", Tokens("Untyped thing here"), {{{0, 1}, "E5"}}},
      {"b", Tokens("Who is this"), {{{0, 1}, "E404"}}},
      {"c", Tokens("Span too long"), {{{1, 9}, "E1"}, {{2, 2}, "E1"}}},
      {"d", Tokens("No anchors at all"), {}}};
  WeakLabelReport report;
  CHECK(GenerateWeakLabels(docs, kb, mapping, vocab, &report).empty());
  CHECK(report.anchors == 4);
  CHECK(report.dropped_empty_labels == 1);
  CHECK(report.skipped_unknown_entity == 1);
  CHECK(report.skipped_bad_span == 2);
}

TEST_CASE("weak labels equal the brute-force closure of mapped types") {
  const TypeVocabulary vocab = ToyVocabulary();
  const KbTypeMapping mapping = ToyMapping(vocab);
  const KnowledgeBase kb = ToyKnowledgeBase();
  Rng rng(2);
  std::vector<AnchorDocument> docs;
  const std::vector<std::string> ids = {"E1", "E2", "E3", "E4", "E5"};
  for (int d = 0; d < 50; ++d) {
    AnchorDocument doc{"d" + std::to_string(d), Tokens("a b c d e f"), {}};
    for (int a = 0; a < 3; ++a) {
      const size_t s = rng.UniformInt(5);
      doc.anchors.push_back({{s, s + 1}, ids[rng.UniformInt(ids.size())]});
    }
    docs.push_back(doc);
  }
  for (const MentionExample &m : GenerateWeakLabels(docs, kb, mapping, vocab)) {
    TypeSet expected;
    for (const std::string &kb_type : kb.EntityTypes(*m.anchor_target)) {
      for (const TypePath &t : mapping.Lookup(kb_type)) {
        for (size_t d = 1; d <= t.depth(); ++d) expected.insert(t.Prefix(d));
      }
    }
    CHECK(m.labels == expected);
    CHECK(m.HasValidSpan());
  }
}

TEST_CASE("anchor document loading") {
  TempDir dir;
  WriteText(dir.File("docs.jsonl"),
            "{\"doc_id\":\"x\",\"tokens\":[\"a\",\"b\"],\"anchors\":[{\"span\":[0,1],\"target\":\"E1\"}]}\n"
            "{\"doc_id\":\"y\",\"tokens\":[\"c\"],\"anchors\":[]}\n");
  const auto docs = LoadAnchorDocuments(dir.File("docs.jsonl"));
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].anchors[0].target == "E1");
  CHECK(docs[1].anchors.empty());
  WriteText(dir.File("bad.jsonl"), "{\"doc_id\":\"x\",\"tokens\":\"a b\"}\n");
  CHECK(CodeOf([&] { LoadAnchorDocuments(dir.File("bad.jsonl")); }) ==
        ErrorCode::kSchemaViolation);
}

TEST_CASE("dev split") {
  std::vector<MentionExample> examples(10000);
  for (size_t i = 0; i < examples.size(); ++i) examples[i].doc_id = std::to_string(i);
  auto [train, dev] = SplitDev(examples, 2000, 9);
  CHECK(train.size() == 8000);
  CHECK(dev.size() == 2000);
  std::set<std::string> seen;
  for (const auto &m : train) seen.insert(m.doc_id);
  for (const auto &m : dev) seen.insert(m.doc_id);
  CHECK(seen.size() == 10000);
  auto is_ordered = [](const std::vector<MentionExample> &v) {
    for (size_t i = 1; i < v.size(); ++i) {
      if (std::stoul(v[i - 1].doc_id) >= std::stoul(v[i].doc_id)) return false;
    }
    return true;
  };
  CHECK(is_ordered(train));
  CHECK(is_ordered(dev));

  auto [train2, dev2] = SplitDev(examples, 2000, 9);
  auto [train3, dev3] = SplitDev(examples, 2000, 10);
  auto ids = [](const std::vector<MentionExample> &v) {
    std::vector<std::string> out;
    for (const auto &m : v) out.push_back(m.doc_id);
    return out;
  };
  CHECK(ids(dev2) == ids(dev));
  CHECK(ids(dev3) != ids(dev));

  CHECK(SplitDev(examples, 0, 1).second.empty());
  CHECK(CodeOf([&] { SplitDev(examples, 10001, 1); }) == ErrorCode::kInsufficientData);
}

TEST_CASE("mention records") {
  const TypeVocabulary vocab = ToyVocabulary();
  json record = {{"doc_id", "d"},
                 {"tokens", {"0", "1", "2", "3", "4", "5", "6", "7", "8", "9"}},
                 {"span", {3, 5}},
                 {"labels", {"/person/politician"}}};
  const MentionExample m = ParseMentionRecord(record, vocab, 0, true);
  CHECK(m.span.length() == 2);
  CHECK(m.labels == Types({"/person", "/person/politician"}));
  CHECK(ParseMentionRecord(MentionToJson(m), vocab, 0, true).labels == m.labels);

  json long_span = record;
  long_span["span"] = {3, 11};
  CHECK(CodeOf([&] { ParseMentionRecord(long_span, vocab, 0, true); }) ==
        ErrorCode::kSchemaViolation);
  json empty_span = record;
  empty_span["span"] = {3, 3};
  CHECK(CodeOf([&] { ParseMentionRecord(empty_span, vocab, 0, true); }) ==
        ErrorCode::kSchemaViolation);
  json unknown = record;
  unknown["labels"] = {"/food"};
  CHECK(CodeOf([&] { ParseMentionRecord(unknown, vocab, 0, true); }) ==
        ErrorCode::kUnknownType);
  json unlabeled = record;
  unlabeled.erase("labels");
  CHECK(CodeOf([&] { ParseMentionRecord(unlabeled, vocab, 0, true); }) ==
        ErrorCode::kSchemaViolation);
  CHECK(ParseMentionRecord(unlabeled, vocab, 0, false).labels.empty());
}

TEST_CASE("dataset files") {
  TempDir dir;
  const TypeVocabulary vocab = ToyVocabulary();
  WriteText(dir.File("data.jsonl"),
            "{\"doc_id\":\"a\",\"tokens\":[\"x\",\"y\"],\"span\":[0,1],\"labels\":[\"/location/city\"]}\n"
            "{\"doc_id\":\"b\",\"tokens\":[\"x\"],\"span\":[0,2],\"labels\":[\"/location\"]}\n");
  try {
    LoadDataset(dir.File("data.jsonl"), vocab);
    FAIL("expected SchemaViolation");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kSchemaViolation);
    CHECK(std::string(e.what()).find("record 1") != std::string::npos);
  }

  // Fuzzed records either load with valid invariants or fail with an error.
  Rng rng(4);
  size_t loaded = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const size_t n = rng.UniformInt(5);
    std::vector<std::string> tokens(n, "w");
    const size_t s = rng.UniformInt(6), e = rng.UniformInt(7);
    json r = {{"doc_id", "d"}, {"tokens", tokens}, {"span", {s, e}},
              {"labels", {vocab.type(rng.UniformInt(vocab.size())).ToString()}}};
    try {
      const MentionExample m = ParseMentionRecord(r, vocab, 0, true);
      CHECK(m.HasValidSpan());
      CHECK(vocab.ExpandWithAncestors(m.labels) == m.labels);
      ++loaded;
    } catch (const Error &err) {
      CHECK(err.code() == ErrorCode::kSchemaViolation);
    }
  }
  CHECK(loaded > 0);

  std::vector<MentionExample> examples = {
      ParseMentionRecord({{"doc_id", "a"}, {"tokens", {"x", "y"}}, {"span", {0, 1}},
                          {"labels", {"/location/city"}}, {"anchor_target", "E4"}},
                         vocab, 0, true)};
  SaveDataset(dir.File("out.jsonl"), examples);
  const auto back = LoadDataset(dir.File("out.jsonl"), vocab);
  REQUIRE(back.size() == 1);
  CHECK(back[0].labels == examples[0].labels);
  CHECK(back[0].anchor_target == "E4");
  CHECK(back[0].tokens == examples[0].tokens);
}
