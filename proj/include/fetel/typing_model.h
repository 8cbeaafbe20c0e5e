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

#ifndef FETEL_TYPING_MODEL_H_
#define FETEL_TYPING_MODEL_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fetel/corpus.h"
#include "fetel/knowledge_base.h"
#include "fetel/mention.h"
#include "fetel/nn.h"
#include "fetel/random.h"
#include "fetel/tensor.h"
#include "fetel/type_system.h"

namespace fetel {

struct ModelConfig {
  size_t embed_dim = 300;
  size_t recurrent_hidden = 250;  // per direction
  size_t recurrent_layers = 2;
  size_t mlp_hidden = 500;
  size_t mlp_layers = 3;
  size_t type_embed_dim = 500;
  double dropout_rate = 0.5;
  // Dropout on the outputs of one recurrent layer before the next.
  double inter_layer_dropout = 0.0;
  // When false the KB type vector and link confidence are zeroed.
  bool use_el_features = true;
  uint64_t seed = 1;

  // Throws InvalidConfig.
  void Validate() const;
  nlohmann::json ToJson() const;
  // Missing keys keep their defaults.
  static ModelConfig FromJson(const nlohmann::json &json);
};

enum class DecodePolicy { kMultiPath, kSinglePath };

// "multi_path" or "single_path"; throws InvalidConfig.
DecodePolicy ParseDecodePolicy(std::string_view name);
std::string_view DecodePolicyName(DecodePolicy policy);

// Model-independent inputs for one mention.
struct MentionFeatures {
  // Embedding rows of the sentence with the mention replaced by one slot.
  std::vector<size_t> context;
  size_t mention_position = 0;
  std::vector<double> mention_string;  // f_s
  std::vector<double> kb_types;        // f_e
  double confidence = 0.0;             // g
};

inline constexpr size_t kMentionSlot = static_cast<size_t>(-2);

// Word rows for the sentence with the span collapsed to kMentionSlot; the
// sequence has n - l + 1 entries. Throws SpanOutOfRange.
std::vector<size_t> ContextTokenIds(const EmbeddingTable &embeddings,
                                    std::span<const std::string> tokens,
                                    TokenSpan span);

// Mean embedding of the span's words. Throws SpanOutOfRange.
std::vector<double> MentionStringVector(const EmbeddingTable &embeddings,
                                        std::span<const std::string> tokens,
                                        TokenSpan span);

struct KbTypeFeatures {
  std::vector<double> one_hot;
  double confidence = 0.0;
};

// One-hot of the linked entity's mapped types plus its confidence; zeros for
// NIL. Throws UnknownEntity when the link names an entity the KB lacks.
KbTypeFeatures EncodeKbTypes(const LinkResult &link, const KnowledgeBase &kb,
                             const KbTypeMapping &mapping,
                             const TypeVocabulary &vocab);

MentionFeatures Featurize(const MentionExample &example,
                          const LinkResult &link, const KnowledgeBase &kb,
                          const KbTypeMapping &mapping,
                          const TypeVocabulary &vocab,
                          const EmbeddingTable &embeddings);

// Predicted set for a score vector: positives (multi_path) or the best
// positive (single_path), falling back to the argmax when nothing is
// positive, always ancestor-closed.
TypeSet DecodePrediction(std::span<const double> scores,
                         const TypeVocabulary &vocab, DecodePolicy policy);

// Context encoder (stacked bidirectional LSTMs), mention-string average, KB
// type one-hot and link confidence fused by an MLP into a mention vector that
// is scored against one embedding per type.
class TypingModel {
 public:
  // Activations kept by ForwardTrain for Backward.
    struct Cache {
    size_t batch = 0;
    size_t steps = 0;
    std::vector<size_t> lengths;
    std::vector<size_t> positions;
    std::vector<Matrix> recurrent_inputs;
    std::vector<nn::DropoutMask> recurrent_masks;
    std::vector<nn::BiLstm::Cache> recurrent_caches;
    std::vector<Matrix> dense_inputs;  // after normalization and dropout
    std::vector<nn::BatchNorm::Cache> norm_caches;
    std::vector<nn::DropoutMask> dense_masks;
    std::vector<Matrix> activations;  // dense outputs before ReLU
    Matrix mention_vectors;           // u_m per row
  };

  TypingModel(const ModelConfig &config,
              std::shared_ptr<EmbeddingTable> embeddings, size_t num_types);
  ~TypingModel();
  TypingModel(const TypingModel &) = delete;
  TypingModel &operator=(const TypingModel &) = delete;

  const ModelConfig &config() const { return config_; }
  size_t num_types() const { return num_types_; }
  size_t fusion_input_dim() const;
  const EmbeddingTable &embeddings() const { return *embeddings_; }

  // Evaluation-mode single-mention operations.
  std::vector<double> EncodeContext(std::span<const std::string> tokens,
                                    TokenSpan span) const;
  std::vector<double> EncodeMentionString(std::span<const std::string> tokens,
                                          TokenSpan span) const;
  // Throws DimensionMismatch.
  std::vector<double> ScoreTypes(std::span<const double> context,
                                 std::span<const double> mention_string,
                                 std::span<const double> kb_types,
                                 double confidence) const;

  // Evaluation-mode scores, one row per mention.
  Matrix Score(std::span<const MentionFeatures> batch) const;

  // Training-mode forward: batch normalization statistics and dropout. The
  // cache feeds Backward. update_statistics=false leaves the running
  // normalization estimates untouched.
  Matrix ForwardTrain(std::span<const MentionFeatures> batch, Rng &rng,
                      Cache &cache, bool update_statistics = true);
  // Accumulates gradients of sum(d_scores * scores) into the parameters.
  void Backward(Cache &cache, const Matrix &d_scores);

  std::vector<nn::Parameter *> Parameters();
  size_t TrainableParameterCount();
  void ZeroGrad();

  Matrix &type_embeddings();
  Matrix &mention_embedding();

  // Parameter blob round trip; Load checks names and shapes.
  void SaveParameters(const std::string &path);
  void LoadParameters(const std::string &path);

 private:
  struct Layers;

  // rng == nullptr selects evaluation mode.
  Matrix Forward(std::span<const MentionFeatures> batch, Rng *rng,
                 Cache *cache) const;
  Matrix FusionInput(std::span<const MentionFeatures> batch,
                     const Matrix &context) const;

  ModelConfig config_;
  std::shared_ptr<EmbeddingTable> embeddings_;
  size_t num_types_;
  std::unique_ptr<Layers> layers_;
};

// A trained model with everything needed to run it again.
struct Checkpoint {
  ModelConfig model_config;
  std::string embeddings_path;
  TypeVocabulary vocab;
  KbTypeMapping mapping;
  nlohmann::json metadata = nlohmann::json::object();
  std::shared_ptr<TypingModel> model;

  // Writes config.json, types.txt, mapping.tsv and parameters.bin into dir.
  void Save(const std::string &dir) const;
  // embeddings_override replaces the recorded embedding path.
  static Checkpoint Load(const std::string &dir,
                         const std::optional<std::string> &embeddings_override = {});
};

}  // namespace fetel

#endif  // FETEL_TYPING_MODEL_H_
