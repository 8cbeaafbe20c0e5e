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

#include <cstdio>
#include <fstream>
#include <sstream>

#include <doctest.h>
#include <json.hpp>

#include "fetel/knowledge_base.h"
#include "fetel/pipeline.h"
#include "fetel/text.h"
#include "support/process.h"
#include "support/synthetic.h"
#include "support/test_util.h"

using namespace fetel;
using namespace fetel::testing;
using nlohmann::json;

namespace {

const std::string kToy = FETEL_FIXTURES "/toy/";

RunResult Run(const TempDir &dir, const std::vector<std::string> &args) {
  return RunProcess(FETEL_BINARY, args, dir.path().string());
}

// Small model flags so the end-to-end runs stay fast.
std::vector<std::string> SmallModel() {
  return {"--recurrent-hidden", "16", "--recurrent-layers", "1", "--mlp-hidden", "64",
          "--type-embed-dim", "32"};
}

void WriteToyEmbeddings(const std::string &path) {
  std::ofstream out(path);
  int i = 0;
  for (const char *w : {"on", "tuesday", ",", "donald", "trump", "pledged", "matt", "damon",
                        "federal", "way", "smiled", "starred"}) {
    out << w;
    for (int j = 0; j < 4; ++j) out << " " << ((i * 7 + j * 3) % 11 - 5) / 10.0;
    out << "\n";
    ++i;
  }
}

}  // namespace

TEST_CASE("build-kb writes a snapshot and a JSON summary") {
  TempDir dir;
  const RunResult r = Run(dir, {"build-kb", "--entities", kToy + "entities.jsonl", "--anchors",
                                kToy + "anchors.tsv", "--out", dir.File("kb.jsonl"), "--types",
                                kToy + "types.txt", "--mapping", kToy + "mapping.tsv"});
  REQUIRE(r.status == 0);
  const json summary = json::parse(r.out);
  CHECK(summary["entities"] == 5);
  CHECK(summary["surfaces"] == 4);
  CHECK(summary["anchor_pairs"] == 7);
  const KnowledgeBase kb = KnowledgeBase::LoadSnapshot(dir.File("kb.jsonl"));
  CHECK(kb.anchors().Commonness("trump", "E1") == 0.75);
  CHECK(kb.Entity("E3").is_person);

  const RunResult empty = Run(dir, {"build-kb", "--entities", kToy + "entities.jsonl",
                                    "--anchors", kToy + "empty_anchors.tsv", "--out",
                                    dir.File("empty.jsonl")});
  REQUIRE(empty.status == 0);
  CHECK(KnowledgeBase::LoadSnapshot(dir.File("empty.jsonl")).anchors().num_surfaces() == 0);
}

TEST_CASE("missing inputs and bad usage") {
  TempDir dir;
  const RunResult missing = Run(dir, {"build-kb", "--entities", dir.File("nope.jsonl"),
                                      "--anchors", kToy + "anchors.tsv", "--out",
                                      dir.File("kb.jsonl")});
  CHECK(missing.status == pipeline::kExitUsage);
  CHECK(missing.err.find(dir.File("nope.jsonl")) != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(dir.File("kb.jsonl")));

  CHECK(Run(dir, {}).status == pipeline::kExitUsage);
  CHECK(Run(dir, {"frobnicate"}).status == pipeline::kExitUsage);
  CHECK(Run(dir, {"--help"}).status == 0);

  WriteText(dir.File("config.json"), "{\"typo_key\": 1}");
  const RunResult bad_config =
      Run(dir, {"build-kb", "--config", dir.File("config.json")});
  CHECK(bad_config.status == pipeline::kExitUsage);
  CHECK(bad_config.err.find("typo_key") != std::string::npos);

  WriteText(dir.File("broken.tsv"), "kb.x\t/food\n");
  const RunResult data_error =
      Run(dir, {"build-kb", "--entities", kToy + "entities.jsonl", "--anchors",
                kToy + "anchors.tsv", "--out", dir.File("kb.jsonl"), "--types",
                kToy + "types.txt", "--mapping", dir.File("broken.tsv")});
  CHECK(data_error.status == pipeline::kExitData);
  CHECK(data_error.err.find("UnknownType") != std::string::npos);
}

TEST_CASE("make-training-data labels anchors and tallies drops") {
  TempDir dir;
  REQUIRE(Run(dir, {"build-kb", "--entities", kToy + "entities.jsonl", "--anchors",
                    kToy + "anchors.tsv", "--out", dir.File("kb.jsonl")})
              .status == 0);
  const RunResult r = Run(dir, {"make-training-data", "--anchor-docs", kToy + "docs.jsonl",
                                "--kb", dir.File("kb.jsonl"), "--types", kToy + "types.txt",
                                "--mapping", kToy + "mapping.tsv", "--out",
                                dir.File("train.jsonl")});
  REQUIRE(r.status == 0);
  const json summary = json::parse(r.out);
  CHECK(summary["report"]["generated"] == 1);
  CHECK(summary["report"]["skipped_unknown_entity"] == 1);
  const auto records = JsonLines(ReadText(dir.File("train.jsonl")));
  REQUIRE(records.size() == 1);
  CHECK(records[0]["labels"] == json({"/person", "/person/business", "/person/politician",
                                      "/person/tv_personality"}));
  CHECK(records[0]["anchor_target"] == "E1");
}

TEST_CASE("predict and link keep input fields") {
  TempDir dir;
  WriteToyEmbeddings(dir.File("vectors.txt"));
  REQUIRE(Run(dir, {"build-kb", "--entities", kToy + "entities.jsonl", "--anchors",
                    kToy + "anchors.tsv", "--out", dir.File("kb.jsonl")})
              .status == 0);
  REQUIRE(Run(dir, {"make-training-data", "--anchor-docs", kToy + "docs.jsonl", "--kb",
                    dir.File("kb.jsonl"), "--types", kToy + "types.txt", "--mapping",
                    kToy + "mapping.tsv", "--out", dir.File("train.jsonl")})
              .status == 0);
  const RunResult train = Run(
      dir, Concat({"train", "--train", dir.File("train.jsonl"), "--kb", dir.File("kb.jsonl"),
                   "--types", kToy + "types.txt", "--mapping", kToy + "mapping.tsv",
                   "--embeddings", dir.File("vectors.txt"), "--out", dir.File("model"),
                   "--epochs", "2", "--batch-size", "1"},
                  {"--recurrent-hidden", "3", "--mlp-hidden", "5", "--type-embed-dim", "4"}));
  REQUIRE(train.status == 0);

  const RunResult predict = Run(dir, {"predict", "--model", dir.File("model"), "--data",
                                      kToy + "mentions.jsonl", "--kb", dir.File("kb.jsonl"),
                                      "--output", dir.File("pred.jsonl")});
  REQUIRE(predict.status == 0);
  const auto input = JsonLines(ReadText(kToy + "mentions.jsonl"));
  const auto output = JsonLines(ReadText(dir.File("pred.jsonl")));
  REQUIRE(output.size() == input.size());
  for (size_t i = 0; i < input.size(); ++i) {
    for (const auto &[key, value] : input[i].items()) CHECK(output[i][key] == value);
    CHECK_FALSE(output[i]["predicted_labels"].empty());
    CHECK(output[i]["scores"].size() == 8);
  }
  CHECK(output[1]["link"]["entity_id"] == "E3");
  CHECK(output[1]["link"]["resolved_surface"] == "Matt Damon");
  CHECK(output[3]["link"]["entity_id"].is_null());

  // Without a type mapping nothing is known to be a person, so no coreference.
  const RunResult bare = Run(dir, {"link", "--kb", dir.File("kb.jsonl"), "--data",
                                   kToy + "mentions.jsonl"});
  REQUIRE(bare.status == 0);
  CHECK(JsonLines(bare.out)[1]["entity_id"].is_null());

  const RunResult link =
      Run(dir, {"link", "--kb", dir.File("kb.jsonl"), "--data", kToy + "mentions.jsonl",
                "--types", kToy + "types.txt", "--mapping", kToy + "mapping.tsv"});
  REQUIRE(link.status == 0);
  const auto links = JsonLines(link.out);
  REQUIRE(links.size() == 4);
  CHECK(links[0]["entity_id"] == "E3");
  CHECK(links[1]["entity_id"] == "E3");
  CHECK(links[1]["resolved_surface"] == "Matt Damon");
  CHECK(links[2]["entity_id"] == "E4");
  CHECK(links[2]["confidence"] == 1.0);
  CHECK(links[3]["entity_id"].is_null());
  CHECK(links[3]["confidence"] == 0.0);
}

TEST_CASE("full synthetic pipeline") {
  TempDir dir;
  SyntheticOptions options;
  options.train_mentions = 120;
  options.dev_mentions = 30;
  options.vocabulary = 200;
  options.embed_dim = 16;
  options.seed = 21;
  const SyntheticCorpus corpus = MakeSyntheticCorpus(options);
  corpus.WriteFiles(dir.path().string());
  const std::string d = dir.path().string() + "/";

  REQUIRE(Run(dir, {"build-kb", "--entities", d + "entities.jsonl", "--anchors",
                    d + "anchors.tsv", "--out", d + "kb.jsonl"})
              .status == 0);
  REQUIRE(Run(dir, {"make-training-data", "--anchor-docs", d + "train_docs.jsonl", "--kb",
                    d + "kb.jsonl", "--types", d + "types.txt", "--mapping",
                    d + "mapping.tsv", "--out", d + "weak_train.jsonl", "--dev-out",
                    d + "weak_dev.jsonl", "--dev-size", "20", "--seed", "3"})
              .status == 0);
  CHECK(JsonLines(ReadText(d + "weak_dev.jsonl")).size() == 20);
  CHECK(JsonLines(ReadText(d + "weak_train.jsonl")).size() == 100);

  // Paths and hyperparameters from a config file; flags override it.
  const json config = {{"kb", d + "kb.jsonl"},
                       {"types", d + "types.txt"},
                       {"mapping", d + "mapping.tsv"},
                       {"embeddings", d + "embeddings.txt"},
                       {"train", d + "train.jsonl"},
                       {"seed", 5},
                       {"training_config", {{"max_epochs", 1}, {"batch_size", 32}}}};
  WriteText(d + "config.json", config.dump());
  const std::vector<std::string> train_args =
      Concat({"train", "--config", d + "config.json", "--epochs", "40", "--patience", "40",
              "--lr", "0.01", "--dropout", "0.1"},
             SmallModel());
  const RunResult train = Run(dir, Concat(train_args, {"--out", d + "model"}));
  REQUIRE(train.status == 0);
  const auto epochs = JsonLines(ReadText(d + "model/train_log.jsonl"));
  CHECK(epochs.size() == 40);
  const json checkpoint_config = json::parse(ReadText(d + "model/config.json"));
  CHECK(checkpoint_config["metadata"]["training_config"]["batch_size"] == 32);
  CHECK(checkpoint_config["metadata"]["training_config"]["seed"] == 5);

  const RunResult eval = Run(dir, {"evaluate", "--model", d + "model", "--data",
                                   d + "train.jsonl", "--kb", d + "kb.jsonl"});
  REQUIRE(eval.status == 0);
  const json report = json::parse(eval.out);
  CHECK(report["strict_accuracy"].get<double>() >= 0.95);
  CHECK(report["n_mentions"] == 120);

  const RunResult single = Run(dir, {"evaluate", "--model", d + "model", "--data",
                                     d + "dev.jsonl", "--kb", d + "kb.jsonl", "--policy",
                                     "single_path", "--records", "--out", d + "report.json"});
  REQUIRE(single.status == 0);
  CHECK(json::parse(ReadText(d + "report.json"))["records"].size() == 30);

  // Same seed, same log.
  const RunResult again = Run(dir, Concat(train_args, {"--out", d + "model2"}));
  REQUIRE(again.status == 0);
  CHECK(ReadText(d + "model/train_log.jsonl") == ReadText(d + "model2/train_log.jsonl"));

  const RunResult no_el = Run(dir, Concat({"train", "--config", d + "config.json", "--epochs",
                                           "2", "--no-el", "--out", d + "noel"},
                                          SmallModel()));
  REQUIRE(no_el.status == 0);
  const json noel_config = json::parse(ReadText(d + "noel/config.json"));
  CHECK(noel_config["model"]["use_el_features"] == false);
  CHECK(noel_config["metadata"]["training_config"]["lambda_p"] == 1.0);
  CHECK(Run(dir, {"evaluate", "--model", d + "noel", "--data", d + "dev.jsonl", "--kb",
                  d + "kb.jsonl"})
            .status == 0);

  CHECK(Run(dir, {"evaluate", "--model", d + "model", "--data", d + "dev.jsonl", "--kb",
                  d + "kb.jsonl", "--policy", "sideways"})
            .status == pipeline::kExitUsage);
}

TEST_CASE("pipeline config round trip") {
  pipeline::PipelineConfig c;
  c.types = "t.txt";
  c.seed = 42;
  c.model_config.mlp_hidden = 7;
  c.training_config.lambda_p = 3.0;
  const json j = c.ToJson();
  CHECK(pipeline::PipelineConfig::FromJson(j).ToJson() == j);
  CHECK_THROWS_AS(pipeline::PipelineConfig::FromJson(json{{"bogus", 1}}), Error);
  CHECK_THROWS_AS(pipeline::PipelineConfig::FromJson(json{{"seed", "x"}}), Error);
  try {
    pipeline::RequireExistingPaths({{"--kb", "/definitely/not/here"}});
    FAIL("expected InvalidConfig");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kInvalidConfig);
    CHECK(std::string(e.what()).find("/definitely/not/here") != std::string::npos);
  }
}
