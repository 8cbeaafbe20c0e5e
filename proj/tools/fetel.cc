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

// fetel: fine-grained entity typing toolkit.
//
//   fetel build-kb --entities E.jsonl --anchors A.tsv --out kb.jsonl
//   fetel make-training-data --anchor-docs D.jsonl --kb kb.jsonl ...
//   fetel train --train T.jsonl --kb kb.jsonl --embeddings W.txt --out ckpt/
//   fetel evaluate --model ckpt/ --data test.jsonl --kb kb.jsonl
//
// Machine-readable output goes to stdout (or --output), summaries to stderr.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fetel/error.h"
#include "fetel/kernels.h"
#include "fetel/pipeline.h"

namespace {

using fetel::pipeline::PipelineConfig;
using nlohmann::json;

// A flag that overrides a config field only when given on the command line.
template <typename T>
struct Override {
  std::vector<CLI::Option *> options;
  T value{};
  bool Given() const {
    for (const CLI::Option *option : options) {
      if (option->count() > 0) return true;
    }
    return false;
  }
  void Apply(T &field) const {
    if (Given()) field = value;
  }
};

// Subcommands sharing a flag bind it to the same field.
template <typename T>
void AddFlag(CLI::App *app, const std::string &name, Override<T> &o,
             const std::string &help) {
  o.options.push_back(app->add_option(name, o.value, help));
}

struct Flags {
  std::string config;
  Override<std::string> types, mapping, embeddings, kb, entities, anchors,
      anchor_docs, train, dev, data, model, out, dev_out, policy;
  Override<size_t> dev_size, recurrent_hidden, recurrent_layers, mlp_hidden,
      mlp_layers, type_embed_dim, batch_size, epochs, patience;
  Override<uint64_t> seed;
  Override<double> lambda_p, nil_rate, learning_rate, dropout, clip;
  CLI::Option *no_person_noise = nullptr;
  CLI::Option *no_el = nullptr;
  std::string output;
  bool records = false;
};

void AddTypeFlags(CLI::App *app, Flags &f) {
  AddFlag(app, "--types", f.types, "Type vocabulary file");
  AddFlag(app, "--mapping", f.mapping, "KB type mapping TSV");
}

PipelineConfig Resolve(const Flags &f) {
  PipelineConfig c;
  if (!f.config.empty()) c = PipelineConfig::LoadFile(f.config);
  f.types.Apply(c.types);
  f.mapping.Apply(c.mapping);
  f.embeddings.Apply(c.embeddings);
  f.kb.Apply(c.kb);
  f.entities.Apply(c.entities);
  f.anchors.Apply(c.anchors);
  f.anchor_docs.Apply(c.anchor_docs);
  f.train.Apply(c.train);
  f.dev.Apply(c.dev);
  f.data.Apply(c.data);
  f.model.Apply(c.model);
  f.out.Apply(c.out);
  f.dev_out.Apply(c.dev_out);
  f.policy.Apply(c.policy);
  f.dev_size.Apply(c.dev_size);
  f.seed.Apply(c.seed);
  f.recurrent_hidden.Apply(c.model_config.recurrent_hidden);
  f.recurrent_layers.Apply(c.model_config.recurrent_layers);
  f.mlp_hidden.Apply(c.model_config.mlp_hidden);
  f.mlp_layers.Apply(c.model_config.mlp_layers);
  f.type_embed_dim.Apply(c.model_config.type_embed_dim);
  f.dropout.Apply(c.model_config.dropout_rate);
  f.lambda_p.Apply(c.training_config.lambda_p);
  f.nil_rate.Apply(c.training_config.nil_dropout_rate);
  f.learning_rate.Apply(c.training_config.learning_rate);
  f.batch_size.Apply(c.training_config.batch_size);
  f.epochs.Apply(c.training_config.max_epochs);
  f.patience.Apply(c.training_config.patience);
  f.clip.Apply(c.training_config.gradient_clip_norm);
  if (f.no_person_noise != nullptr && f.no_person_noise->count() > 0) {
    c.training_config.person_noise_enabled = false;
  }
  if (f.no_el != nullptr && f.no_el->count() > 0) {
    c.model_config.use_el_features = false;
    // Without KB features there is no person noise to compensate for.
    if (!f.lambda_p.Given()) {
      c.training_config.lambda_p = 1.0;
    }
    c.training_config.person_noise_enabled = false;
  }
  return c;
}

// Writes to --output when given, stdout otherwise.
class Sink {
 public:
  explicit Sink(const std::string &path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) {
        throw fetel::Error(fetel::ErrorCode::kIoFailure, "cannot write " + path);
      }
    }
  }
  std::ostream &stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"fetel: fine-grained entity typing with entity linking features"};
  app.require_subcommand(1);
  app.fallthrough();  // --config and --seed are accepted after the subcommand
  Flags f;
  app.add_option("--config", f.config, "JSON pipeline config; flags take precedence")
      ->check(CLI::ExistingFile);
  AddFlag(&app, "--seed", f.seed, "Random seed");

  CLI::App *build_kb = app.add_subcommand("build-kb", "Build a KB snapshot");
  AddFlag(build_kb, "--entities", f.entities, "Entity records (JSONL)");
  AddFlag(build_kb, "--anchors", f.anchors, "Anchor pairs (surface<TAB>entity)");
  AddFlag(build_kb, "--out", f.out, "Snapshot output path");
  AddTypeFlags(build_kb, f);

  CLI::App *make = app.add_subcommand("make-training-data",
                                      "Weakly label anchor documents");
  AddFlag(make, "--anchor-docs", f.anchor_docs, "Anchor documents (JSONL)");
  AddFlag(make, "--kb", f.kb, "KB snapshot");
  AddTypeFlags(make, f);
  AddFlag(make, "--out", f.out, "Training mentions output (JSONL)");
  AddFlag(make, "--dev-out", f.dev_out, "Dev mentions output (JSONL)");
  AddFlag(make, "--dev-size", f.dev_size, "Dev split size (default 2000)");

  CLI::App *train = app.add_subcommand("train", "Train a typing model");
  AddFlag(train, "--train", f.train, "Training mentions (JSONL)");
  AddFlag(train, "--dev", f.dev, "Dev mentions (JSONL)");
  AddFlag(train, "--kb", f.kb, "KB snapshot");
  AddTypeFlags(train, f);
  AddFlag(train, "--embeddings", f.embeddings, "Word vectors (text format)");
  AddFlag(train, "--out", f.out, "Checkpoint directory");
  AddFlag(train, "--lambda-p", f.lambda_p, "Penalty weight on fine person types");
  AddFlag(train, "--nil-rate", f.nil_rate, "NIL dropout rate");
  f.no_person_noise = train->add_flag("--no-person-noise", "Disable person noise");
  f.no_el = train->add_flag("--no-el", "Zero the entity linking features");
  AddFlag(train, "--epochs", f.epochs, "Maximum epochs");
  AddFlag(train, "--patience", f.patience, "Early stopping patience");
  AddFlag(train, "--batch-size", f.batch_size, "Mini-batch size");
  AddFlag(train, "--lr", f.learning_rate, "Adam learning rate");
  AddFlag(train, "--clip", f.clip, "Gradient clipping norm");
  AddFlag(train, "--dropout", f.dropout, "Dropout rate");
  AddFlag(train, "--recurrent-hidden", f.recurrent_hidden, "LSTM units per direction");
  AddFlag(train, "--recurrent-layers", f.recurrent_layers, "Stacked BiLSTM layers");
  AddFlag(train, "--mlp-hidden", f.mlp_hidden, "MLP hidden units");
  AddFlag(train, "--mlp-layers", f.mlp_layers, "MLP layers");
  AddFlag(train, "--type-embed-dim", f.type_embed_dim, "Type embedding size");

  auto add_inference = [&](CLI::App *cmd) {
    AddFlag(cmd, "--model", f.model, "Checkpoint directory");
    AddFlag(cmd, "--data", f.data, "Mentions (JSONL)");
    AddFlag(cmd, "--kb", f.kb, "KB snapshot");
    AddFlag(cmd, "--embeddings", f.embeddings, "Override the checkpoint's word vectors");
    AddFlag(cmd, "--policy", f.policy, "multi_path or single_path");
    cmd->add_option("--out,--output", f.output, "Output file (default stdout)");
  };
  CLI::App *evaluate = app.add_subcommand("evaluate", "Score a labeled dataset");
  add_inference(evaluate);
  evaluate->add_flag("--records", f.records, "Include per-mention records");
  CLI::App *predict = app.add_subcommand("predict", "Type mentions");
  add_inference(predict);

  CLI::App *link = app.add_subcommand("link", "Link mentions to KB entities");
  AddFlag(link, "--kb", f.kb, "KB snapshot");
  AddFlag(link, "--data", f.data, "Mentions (JSONL)");
  AddTypeFlags(link, f);
  link->add_option("--out,--output", f.output, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? fetel::pipeline::kExitOk : fetel::pipeline::kExitUsage;
  }

  try {
    PipelineConfig config = Resolve(f);
    json summary;
    std::string human;
    if (build_kb->parsed()) {
      std::optional<std::pair<std::string, std::string>> types;
      if (!config.types.empty() || !config.mapping.empty()) {
        types.emplace(config.types, config.mapping);
      }
      summary = fetel::pipeline::BuildKb(config.entities, config.anchors,
                                         config.out, types);
      std::cout << summary.dump() << "\n";
      human = "wrote " + config.out + ": " + summary["entities"].dump() +
              " entities, " + summary["surfaces"].dump() + " surfaces";
    } else if (make->parsed()) {
      summary = fetel::pipeline::MakeTrainingData(config);
      std::cout << summary.dump() << "\n";
      human = "generated " + summary["report"]["generated"].dump() + " of " +
              summary["report"]["anchors"].dump() + " anchors";
    } else if (train->parsed()) {
      std::cerr << "kernels: " << fetel::kernels::Active().name << "\n";
      summary = fetel::pipeline::Train(config, std::cout);
      std::cout << summary.dump() << "\n";
      human = "best epoch " + summary["best_epoch"].dump() + ", dev strict " +
              summary["best_dev_strict"].dump() + ", checkpoint " + config.out;
    } else if (evaluate->parsed()) {
      summary = fetel::pipeline::Evaluate(config, f.records);
      Sink sink(f.output);
      sink.stream() << summary.dump(2) << "\n";
      human = "strict " + summary["strict_accuracy"].dump() + ", macro F1 " +
              summary["macro_f1"].dump() + ", micro F1 " + summary["micro_f1"].dump();
    } else if (predict->parsed()) {
      Sink sink(f.output);
      summary = fetel::pipeline::PredictFile(config, sink.stream());
      human = "typed " + summary["mentions"].dump() + " mentions";
    } else if (link->parsed()) {
      Sink sink(f.output);
      summary = fetel::pipeline::LinkFile(config, sink.stream());
      human = "linked " + summary["mentions"].dump() + " mentions, " +
              summary["nil"].dump() + " NIL";
    }
    std::cerr << human << "\n";
    return fetel::pipeline::kExitOk;
  } catch (const fetel::Error &e) {
    std::cerr << "fetel: " << e.what() << "\n";
    return fetel::pipeline::ExitStatusFor(e.code());
  } catch (const std::exception &e) {
    std::cerr << "fetel: " << e.what() << "\n";
    return fetel::pipeline::kExitRuntime;
  }
}
