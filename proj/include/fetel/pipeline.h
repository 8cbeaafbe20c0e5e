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

#ifndef FETEL_PIPELINE_H_
#define FETEL_PIPELINE_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fetel/error.h"
#include "fetel/training.h"
#include "fetel/typing_model.h"

// End-to-end commands behind the `fetel` executable. Each command returns a
// machine-readable summary and reports failures as fetel::Error.
namespace fetel::pipeline {

// Exit statuses of the command-line tool.
enum ExitStatus : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitRuntime = 3,
};

int ExitStatusFor(ErrorCode code);

struct PipelineConfig {
  std::string types;
  std::string mapping;
  std::string embeddings;
  std::string kb;
  std::string entities;
  std::string anchors;
  std::string anchor_docs;
  std::string train;
  std::string dev;
  std::string data;
  std::string model;
  std::string out;
  std::string dev_out;
  size_t dev_size = 2000;
  std::string policy = "multi_path";
  uint64_t seed = 1;
  ModelConfig model_config;
  TrainingConfig training_config;

  nlohmann::json ToJson() const;
  // Unknown keys are rejected; missing keys keep their defaults.
  static PipelineConfig FromJson(const nlohmann::json &json);
  static PipelineConfig LoadFile(const std::string &path);
};

// Throws InvalidConfig naming the first flag whose path is empty or missing.
void RequireExistingPaths(
    const std::vector<std::pair<std::string, std::string>> &flag_paths);

// Entities JSONL + anchor TSV -> snapshot. With a mapping, person flags are
// computed before saving.
nlohmann::json BuildKb(const std::string &entities_path,
                       const std::string &anchors_path,
                       const std::string &out_path,
                       const std::optional<std::pair<std::string, std::string>>
                           &types_and_mapping = std::nullopt);

// Anchor documents -> weakly labeled mention JSONL, optionally carving out a
// random dev split.
nlohmann::json MakeTrainingData(const PipelineConfig &config);

// Trains and writes a checkpoint to config.out. Epoch logs go to epoch_log as
// JSON lines (and to train_log.jsonl inside the checkpoint).
nlohmann::json Train(const PipelineConfig &config, std::ostream &epoch_log);

nlohmann::json Evaluate(const PipelineConfig &config, bool include_records);

// Copies each input record, adding predicted_labels, scores and link fields.
nlohmann::json PredictFile(const PipelineConfig &config, std::ostream &out);

// One LinkResult line per input mention.
nlohmann::json LinkFile(const PipelineConfig &config, std::ostream &out);

}  // namespace fetel::pipeline

#endif  // FETEL_PIPELINE_H_
