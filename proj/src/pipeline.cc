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

#include "fetel/pipeline.h"

#include <filesystem>
#include <fstream>
#include <iostream>

#include "fetel/corpus.h"
#include "fetel/entity_linker.h"
#include "fetel/evaluation.h"
#include "fetel/kernels.h"
#include "fetel/knowledge_base.h"
#include "fetel/text.h"

namespace fetel::pipeline {

using nlohmann::json;
using nlohmann::ordered_json;

int ExitStatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidConfig:
      return kExitUsage;
    case ErrorCode::kNonFiniteLoss:
      return kExitRuntime;
    default:
      return kExitData;
  }
}

json PipelineConfig::ToJson() const {
  return {{"types", types},
          {"mapping", mapping},
          {"embeddings", embeddings},
          {"kb", kb},
          {"entities", entities},
          {"anchors", anchors},
          {"anchor_docs", anchor_docs},
          {"train", train},
          {"dev", dev},
          {"data", data},
          {"model", model},
          {"out", out},
          {"dev_out", dev_out},
          {"dev_size", dev_size},
          {"policy", policy},
          {"seed", seed},
          {"model_config", model_config.ToJson()},
          {"training_config", training_config.ToJson()}};
}

PipelineConfig PipelineConfig::FromJson(const json &j) {
  if (!j.is_object()) {
    throw Error(ErrorCode::kInvalidConfig, "pipeline config must be a JSON object");
  }
  PipelineConfig c;
  const json defaults = c.ToJson();
  for (const auto &[key, value] : j.items()) {
    if (!defaults.contains(key)) {
      throw Error(ErrorCode::kInvalidConfig, "unknown config key \"" + key + "\"");
    }
  }
  try {
    auto text = [&](const char *key, std::string &field) {
      field = j.value(key, field);
    };
    text("types", c.types);
    text("mapping", c.mapping);
    text("embeddings", c.embeddings);
    text("kb", c.kb);
    text("entities", c.entities);
    text("anchors", c.anchors);
    text("anchor_docs", c.anchor_docs);
    text("train", c.train);
    text("dev", c.dev);
    text("data", c.data);
    text("model", c.model);
    text("out", c.out);
    text("dev_out", c.dev_out);
    text("policy", c.policy);
    c.dev_size = j.value("dev_size", c.dev_size);
    c.seed = j.value("seed", c.seed);
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("pipeline config: ") + e.what());
  }
  if (j.contains("model_config")) c.model_config = ModelConfig::FromJson(j["model_config"]);
  if (j.contains("training_config")) {
    c.training_config = TrainingConfig::FromJson(j["training_config"]);
  }
  ParseDecodePolicy(c.policy);
  return c;
}

PipelineConfig PipelineConfig::LoadFile(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInvalidConfig, "cannot open config " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) {
    throw Error(ErrorCode::kInvalidConfig, path + ": invalid JSON");
  }
  return FromJson(j);
}

void RequireExistingPaths(
    const std::vector<std::pair<std::string, std::string>> &flag_paths) {
  for (const auto &[flag, path] : flag_paths) {
    if (path.empty()) {
      throw Error(ErrorCode::kInvalidConfig, "missing required " + flag);
    }
    if (!std::filesystem::exists(path)) {
      throw Error(ErrorCode::kInvalidConfig, flag + ": no such path: " + path);
    }
  }
}

namespace {

void RequireOutput(const std::string &flag, const std::string &path) {
  if (path.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "missing required " + flag);
  }
}

KnowledgeBase LoadKb(const std::string &path, const KbTypeMapping *mapping) {
  KnowledgeBase kb = KnowledgeBase::LoadSnapshot(path);
  if (mapping != nullptr) kb.AnnotatePersons(*mapping);
  return kb;
}

json ReportJson(const WeakLabelReport &report) {
  return {{"anchors", report.anchors},
          {"generated", report.generated},
          {"dropped_empty_labels", report.dropped_empty_labels},
          {"skipped_unknown_entity", report.skipped_unknown_entity},
          {"skipped_bad_span", report.skipped_bad_span}};
}

template <typename Fn>
size_t ForEachRecord(const std::string &path, Fn fn) {
  std::ifstream in = OpenForRead(path);
  std::string line;
  size_t index = 0;
  while (std::getline(in, line)) {
    if (Trim(line).empty()) continue;
    ordered_json record = ordered_json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object()) {
      throw Error(ErrorCode::kSchemaViolation,
                  path + " record " + std::to_string(index) + ": not a JSON object");
    }
    fn(std::move(record), index++);
  }
  return index;
}

ordered_json LinkJson(const LinkResult &link) {
  ordered_json out;
  out["entity_id"] = link.entity_id ? ordered_json(*link.entity_id) : ordered_json(nullptr);
  out["confidence"] = link.confidence;
  out["resolved_surface"] = link.resolved_surface;
  return out;
}

}  // namespace

json BuildKb(const std::string &entities_path, const std::string &anchors_path,
             const std::string &out_path,
             const std::optional<std::pair<std::string, std::string>>
                 &types_and_mapping) {
  RequireExistingPaths({{"--entities", entities_path}, {"--anchors", anchors_path}});
  RequireOutput("--out", out_path);
  std::optional<KbTypeMapping> mapping;
  if (types_and_mapping) {
    RequireExistingPaths({{"--types", types_and_mapping->first},
                          {"--mapping", types_and_mapping->second}});
    TypeVocabulary vocab = TypeVocabulary::Load(types_and_mapping->first);
    mapping = KbTypeMapping::Load(types_and_mapping->second, vocab);
  }
  KnowledgeBase kb;
  kb.LoadEntities(entities_path);
  IngestReport report;
  kb.anchors() = IngestAnchorFile(anchors_path, &report);
  if (mapping) kb.AnnotatePersons(*mapping);
  kb.SaveSnapshot(out_path);
  return {{"entities", kb.num_entities()},
          {"surfaces", kb.anchors().num_surfaces()},
          {"anchor_pairs", report.pairs_read},
          {"anchor_pairs_ingested", report.pairs_ingested},
          {"skipped_empty_surface", report.empty_surfaces},
          {"skipped_empty_entity", report.empty_entities},
          {"snapshot", out_path}};
}

json MakeTrainingData(const PipelineConfig &config) {
  RequireExistingPaths({{"--anchor-docs", config.anchor_docs},
                        {"--kb", config.kb},
                        {"--mapping", config.mapping},
                        {"--types", config.types}});
  RequireOutput("--out", config.out);
  TypeVocabulary vocab = TypeVocabulary::Load(config.types);
  KbTypeMapping mapping = KbTypeMapping::Load(config.mapping, vocab);
  KnowledgeBase kb = LoadKb(config.kb, &mapping);
  std::vector<AnchorDocument> documents = LoadAnchorDocuments(config.anchor_docs);
  WeakLabelReport report;
  std::vector<MentionExample> examples =
      GenerateWeakLabels(documents, kb, mapping, vocab, &report);
  json summary = {{"documents", documents.size()}, {"report", ReportJson(report)}};
  if (!config.dev_out.empty()) {
    auto [train, dev] = SplitDev(std::move(examples), config.dev_size, config.seed);
    SaveDataset(config.out, train);
    SaveDataset(config.dev_out, dev);
    summary["train_examples"] = train.size();
    summary["dev_examples"] = dev.size();
  } else {
    SaveDataset(config.out, examples);
    summary["train_examples"] = examples.size();
  }
  return summary;
}

json Train(const PipelineConfig &config, std::ostream &epoch_log) {
  RequireExistingPaths({{"--train", config.train},
                        {"--kb", config.kb},
                        {"--mapping", config.mapping},
                        {"--types", config.types},
                        {"--embeddings", config.embeddings}});
  if (!config.dev.empty()) RequireExistingPaths({{"--dev", config.dev}});
  RequireOutput("--out", config.out);

  ModelConfig model_config = config.model_config;
  TrainingConfig training_config = config.training_config;
  model_config.seed = config.seed;
  training_config.seed = config.seed;
  model_config.Validate();
  training_config.Validate();

  TypeVocabulary vocab = TypeVocabulary::Load(config.types);
  KbTypeMapping mapping = KbTypeMapping::Load(config.mapping, vocab);
  KnowledgeBase kb = LoadKb(config.kb, &mapping);
  auto embeddings = std::make_shared<EmbeddingTable>(
      EmbeddingTable::Load(config.embeddings, model_config.seed));
  // The word vectors fix the input width.
  model_config.embed_dim = embeddings->dimension();
  std::vector<MentionExample> train_set = LoadDataset(config.train, vocab);
  // Without a dev file, model selection runs on the training set.
  std::vector<MentionExample> dev_set =
      config.dev.empty() ? train_set : LoadDataset(config.dev, vocab);

  Checkpoint checkpoint;
  checkpoint.model_config = model_config;
  checkpoint.embeddings_path = std::filesystem::absolute(config.embeddings).string();
  checkpoint.vocab = vocab;
  checkpoint.mapping = mapping;
  checkpoint.model = std::make_shared<TypingModel>(model_config, embeddings, vocab.size());

  std::error_code ec;
  std::filesystem::create_directories(config.out, ec);
  if (ec) throw Error(ErrorCode::kIoFailure, "cannot create " + config.out);
  std::ofstream log_file = OpenForWrite(config.out + "/train_log.jsonl");
  Trainer trainer(*checkpoint.model, kb, mapping, vocab, training_config);
  TrainingResult result = trainer.Train(train_set, dev_set, [&](const EpochLog &log) {
    const std::string line = log.ToJson().dump();
    epoch_log << line << "\n";
    epoch_log.flush();
    log_file << line << "\n";
    log_file.flush();
  });

  checkpoint.metadata = {{"training_config", training_config.ToJson()},
                         {"best_epoch", result.best_epoch},
                         {"best_dev_strict", result.best_dev_strict},
                         {"epochs_run", result.log.size()},
                         {"train_examples", train_set.size()},
                         {"dev_examples", dev_set.size()},
                         {"kernels", std::string(kernels::Active().name)}};
  checkpoint.Save(config.out);
  return {{"checkpoint", config.out},
          {"best_epoch", result.best_epoch},
          {"best_dev_strict", result.best_dev_strict},
          {"epochs_run", result.log.size()},
          {"parameters", checkpoint.model->TrainableParameterCount()}};
}

json Evaluate(const PipelineConfig &config, bool include_records) {
  RequireExistingPaths({{"--model", config.model},
                        {"--data", config.data},
                        {"--kb", config.kb}});
  if (!config.embeddings.empty()) {
    RequireExistingPaths({{"--embeddings", config.embeddings}});
  }
  const DecodePolicy policy = ParseDecodePolicy(config.policy);
  Checkpoint checkpoint = Checkpoint::Load(
      config.model, config.embeddings.empty() ? std::nullopt
                                              : std::optional(config.embeddings));
  KnowledgeBase kb = LoadKb(config.kb, &checkpoint.mapping);
  std::vector<MentionExample> dataset = LoadDataset(config.data, checkpoint.vocab);
  EvalReport report = fetel::Evaluate(*checkpoint.model, dataset, kb,
                                      checkpoint.mapping, checkpoint.vocab, policy);
  json out = report.ToJson(include_records);
  out["policy"] = config.policy;
  return out;
}

json PredictFile(const PipelineConfig &config, std::ostream &out) {
  RequireExistingPaths({{"--model", config.model},
                        {"--data", config.data},
                        {"--kb", config.kb}});
  if (!config.embeddings.empty()) {
    RequireExistingPaths({{"--embeddings", config.embeddings}});
  }
  const DecodePolicy policy = ParseDecodePolicy(config.policy);
  Checkpoint checkpoint = Checkpoint::Load(
      config.model, config.embeddings.empty() ? std::nullopt
                                              : std::optional(config.embeddings));
  KnowledgeBase kb = LoadKb(config.kb, &checkpoint.mapping);

  std::vector<ordered_json> records;
  std::vector<MentionExample> mentions;
  ForEachRecord(config.data, [&](ordered_json record, size_t index) {
    mentions.push_back(ParseMentionRecord(json::parse(record.dump()),
                                          checkpoint.vocab, index, false));
    records.push_back(std::move(record));
  });
  std::vector<Prediction> predictions = Predict(
      *checkpoint.model, mentions, kb, checkpoint.mapping, checkpoint.vocab, policy);
  for (size_t i = 0; i < records.size(); ++i) {
    ordered_json &record = records[i];
    record["predicted_labels"] = ToStrings(predictions[i].labels);
    ordered_json scores = ordered_json::object();
    for (size_t t = 0; t < checkpoint.vocab.size(); ++t) {
      scores[checkpoint.vocab.type(t).ToString()] = predictions[i].scores[t];
    }
    record["scores"] = std::move(scores);
    record["link"] = LinkJson(predictions[i].link);
    out << record.dump() << "\n";
  }
  return {{"mentions", records.size()}, {"policy", config.policy}};
}

json LinkFile(const PipelineConfig &config, std::ostream &out) {
  RequireExistingPaths({{"--kb", config.kb}, {"--data", config.data}});
  std::optional<KbTypeMapping> mapping;
  TypeVocabulary vocab;
  if (!config.mapping.empty() || !config.types.empty()) {
    RequireExistingPaths({{"--types", config.types}, {"--mapping", config.mapping}});
    vocab = TypeVocabulary::Load(config.types);
    mapping = KbTypeMapping::Load(config.mapping, vocab);
  }
  KnowledgeBase kb = LoadKb(config.kb, mapping ? &*mapping : nullptr);

  // Labels are irrelevant to linking; parse with an empty vocabulary check.
  std::vector<MentionExample> mentions;
  std::vector<ordered_json> records;
  ForEachRecord(config.data, [&](ordered_json record, size_t index) {
    ordered_json stripped = record;
    stripped.erase("labels");
    mentions.push_back(
        ParseMentionRecord(json::parse(stripped.dump()), vocab, index, false));
    records.push_back(std::move(record));
  });
  std::vector<LinkResult> links = LinkCorpus(kb, mentions);
  size_t nil = 0;
  for (size_t i = 0; i < mentions.size(); ++i) {
    ordered_json line;
    line["doc_id"] = mentions[i].doc_id;
    line["span"] = {mentions[i].span.start, mentions[i].span.end};
    line["surface"] = mentions[i].Surface();
    const ordered_json link = LinkJson(links[i]);
    for (const auto &[key, value] : link.items()) line[key] = value;
    out << line.dump() << "\n";
    nil += links[i].is_nil();
  }
  return {{"mentions", mentions.size()}, {"nil", nil}};
}

}  // namespace fetel::pipeline
