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

#include "fetel/typing_model.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "fetel/error.h"
#include "fetel/kernels.h"
#include "fetel/text.h"

namespace fetel {

using nlohmann::json;

void ModelConfig::Validate() const {
  auto require = [](bool ok, const char *what) {
    if (!ok) throw Error(ErrorCode::kInvalidConfig, what);
  };
  require(embed_dim > 0, "embed_dim must be positive");
  require(recurrent_hidden > 0, "recurrent_hidden must be positive");
  require(recurrent_layers > 0, "recurrent_layers must be positive");
  require(mlp_hidden > 0, "mlp_hidden must be positive");
  require(mlp_layers > 0, "mlp_layers must be positive");
  require(type_embed_dim > 0, "type_embed_dim must be positive");
  require(dropout_rate >= 0.0 && dropout_rate < 1.0,
          "dropout_rate must lie in [0, 1)");
  require(inter_layer_dropout >= 0.0 && inter_layer_dropout < 1.0,
          "inter_layer_dropout must lie in [0, 1)");
}

json ModelConfig::ToJson() const {
  return {{"embed_dim", embed_dim},
          {"recurrent_hidden", recurrent_hidden},
          {"recurrent_layers", recurrent_layers},
          {"mlp_hidden", mlp_hidden},
          {"mlp_layers", mlp_layers},
          {"type_embed_dim", type_embed_dim},
          {"dropout_rate", dropout_rate},
          {"inter_layer_dropout", inter_layer_dropout},
          {"use_el_features", use_el_features},
          {"seed", seed}};
}

ModelConfig ModelConfig::FromJson(const json &j) {
  ModelConfig c;
  try {
    c.embed_dim = j.value("embed_dim", c.embed_dim);
    c.recurrent_hidden = j.value("recurrent_hidden", c.recurrent_hidden);
    c.recurrent_layers = j.value("recurrent_layers", c.recurrent_layers);
    c.mlp_hidden = j.value("mlp_hidden", c.mlp_hidden);
    c.mlp_layers = j.value("mlp_layers", c.mlp_layers);
    c.type_embed_dim = j.value("type_embed_dim", c.type_embed_dim);
    c.dropout_rate = j.value("dropout_rate", c.dropout_rate);
    c.inter_layer_dropout = j.value("inter_layer_dropout", c.inter_layer_dropout);
    c.use_el_features = j.value("use_el_features", c.use_el_features);
    c.seed = j.value("seed", c.seed);
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("model config: ") + e.what());
  }
  return c;
}

DecodePolicy ParseDecodePolicy(std::string_view name) {
  if (name == "multi_path") return DecodePolicy::kMultiPath;
  if (name == "single_path") return DecodePolicy::kSinglePath;
  throw Error(ErrorCode::kInvalidConfig,
              "unknown decode policy \"" + std::string(name) + "\"");
}

std::string_view DecodePolicyName(DecodePolicy policy) {
  return policy == DecodePolicy::kMultiPath ? "multi_path" : "single_path";
}

namespace {

void CheckSpan(std::span<const std::string> tokens, TokenSpan span) {
  if (span.start >= span.end || span.end > tokens.size()) {
    throw Error(ErrorCode::kSpanOutOfRange,
                "span [" + std::to_string(span.start) + ", " +
                    std::to_string(span.end) + ") over " +
                    std::to_string(tokens.size()) + " tokens");
  }
}

}  // namespace

std::vector<size_t> ContextTokenIds(const EmbeddingTable &embeddings,
                                    std::span<const std::string> tokens,
                                    TokenSpan span) {
  CheckSpan(tokens, span);
  std::vector<size_t> ids;
  ids.reserve(tokens.size() - span.length() + 1);
  for (size_t i = 0; i < span.start; ++i) ids.push_back(embeddings.Find(tokens[i]));
  ids.push_back(kMentionSlot);
  for (size_t i = span.end; i < tokens.size(); ++i) {
    ids.push_back(embeddings.Find(tokens[i]));
  }
  return ids;
}

std::vector<double> MentionStringVector(const EmbeddingTable &embeddings,
                                        std::span<const std::string> tokens,
                                        TokenSpan span) {
  CheckSpan(tokens, span);
  std::vector<double> mean(embeddings.dimension(), 0.0);
  for (size_t i = span.start; i < span.end; ++i) {
    std::span<const double> v = embeddings.Lookup(tokens[i]);
    for (size_t j = 0; j < mean.size(); ++j) mean[j] += v[j];
  }
  const double l = static_cast<double>(span.length());
  for (double &x : mean) x /= l;
  return mean;
}

KbTypeFeatures EncodeKbTypes(const LinkResult &link, const KnowledgeBase &kb,
                             const KbTypeMapping &mapping,
                             const TypeVocabulary &vocab) {
  if (link.is_nil()) return {std::vector<double>(vocab.size(), 0.0), 0.0};
  const EntityRecord &entity = kb.Entity(*link.entity_id);
  return {vocab.OneHot(vocab.ExpandWithAncestors(mapping.Map(entity.kb_types))),
          link.confidence};
}

MentionFeatures Featurize(const MentionExample &example,
                          const LinkResult &link, const KnowledgeBase &kb,
                          const KbTypeMapping &mapping,
                          const TypeVocabulary &vocab,
                          const EmbeddingTable &embeddings) {
  MentionFeatures features;
  features.context = ContextTokenIds(embeddings, example.tokens, example.span);
  features.mention_position = example.span.start;
  features.mention_string =
      MentionStringVector(embeddings, example.tokens, example.span);
  KbTypeFeatures kb_features = EncodeKbTypes(link, kb, mapping, vocab);
  features.kb_types = std::move(kb_features.one_hot);
  features.confidence = kb_features.confidence;
  return features;
}

TypeSet DecodePrediction(std::span<const double> scores,
                         const TypeVocabulary &vocab, DecodePolicy policy) {
  if (scores.empty()) return {};
  const size_t argmax = static_cast<size_t>(
      std::max_element(scores.begin(), scores.end()) - scores.begin());
  TypeSet predicted;
  if (policy == DecodePolicy::kMultiPath) {
    for (size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] > 0.0) predicted.insert(vocab.type(i));
    }
  }
  // The best positive type, or the argmax fallback, is the argmax either way.
  if (predicted.empty()) predicted.insert(vocab.type(argmax));
  return PrefixClosure(predicted);
}

struct TypingModel::Layers {
  std::vector<nn::BiLstm> recurrent;
  std::vector<nn::BatchNorm> norms;
  std::vector<nn::Linear> dense;
  nn::Parameter type_embeddings;
  nn::Parameter mention_embedding;
  nn::Parameter unk_embedding;  // buffer mirrored from the embedding table
};

TypingModel::TypingModel(const ModelConfig &config,
                         std::shared_ptr<EmbeddingTable> embeddings,
                         size_t num_types)
    : config_(config),
      embeddings_(std::move(embeddings)),
      num_types_(num_types),
      layers_(std::make_unique<Layers>()) {
  config_.Validate();
  if (embeddings_ == nullptr || embeddings_->dimension() != config_.embed_dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                "embedding dimension does not match embed_dim");
  }
  if (num_types_ == 0) {
    throw Error(ErrorCode::kInvalidConfig, "empty type vocabulary");
  }
  size_t in = config_.embed_dim;
  for (size_t l = 0; l < config_.recurrent_layers; ++l) {
    layers_->recurrent.emplace_back("context.layer" + std::to_string(l), in,
                                    config_.recurrent_hidden);
    in = 2 * config_.recurrent_hidden;
  }
  in = fusion_input_dim();
  for (size_t l = 0; l < config_.mlp_layers; ++l) {
    const size_t out = l + 1 == config_.mlp_layers ? config_.type_embed_dim
                                                   : config_.mlp_hidden;
    layers_->norms.emplace_back("mlp.norm" + std::to_string(l), in);
    layers_->dense.emplace_back("mlp.dense" + std::to_string(l), in, out);
    in = out;
  }
  layers_->type_embeddings =
      nn::Parameter("type_embeddings", num_types_, config_.type_embed_dim);
  layers_->mention_embedding =
      nn::Parameter("mention_embedding", 1, config_.embed_dim);
  layers_->unk_embedding =
      nn::Parameter("unk_embedding", 1, config_.embed_dim, false);

  Rng rng(config_.seed);
  for (auto &layer : layers_->recurrent) layer.Init(rng);
  for (auto &layer : layers_->dense) layer.Init(rng);
  nn::InitUniform(layers_->type_embeddings.value, 0.05, rng);
  const auto &mention = embeddings_->mention_vector();
  std::copy(mention.begin(), mention.end(), layers_->mention_embedding.value.data());
  const auto &unk = embeddings_->unk_vector();
  std::copy(unk.begin(), unk.end(), layers_->unk_embedding.value.data());
}

TypingModel::~TypingModel() = default;

size_t TypingModel::fusion_input_dim() const {
  return 2 * config_.recurrent_hidden + config_.embed_dim + num_types_ + 1;
}

Matrix &TypingModel::type_embeddings() { return layers_->type_embeddings.value; }
Matrix &TypingModel::mention_embedding() {
  return layers_->mention_embedding.value;
}

std::vector<nn::Parameter *> TypingModel::Parameters() {
  std::vector<nn::Parameter *> params;
  for (auto &layer : layers_->recurrent) layer.Collect(params);
  for (size_t l = 0; l < layers_->dense.size(); ++l) {
    layers_->norms[l].Collect(params);
    layers_->dense[l].Collect(params);
  }
  params.push_back(&layers_->type_embeddings);
  params.push_back(&layers_->mention_embedding);
  params.push_back(&layers_->unk_embedding);
  return params;
}

size_t TypingModel::TrainableParameterCount() {
  size_t count = 0;
  for (nn::Parameter *p : Parameters()) {
    if (p->trainable) count += p->value.size();
  }
  return count;
}

void TypingModel::ZeroGrad() {
  for (nn::Parameter *p : Parameters()) p->grad.Fill(0.0);
}

Matrix TypingModel::FusionInput(std::span<const MentionFeatures> batch,
                                const Matrix &context) const {
  const size_t c = context.cols(), e = config_.embed_dim, k = num_types_;
  Matrix input(batch.size(), fusion_input_dim());
  for (size_t b = 0; b < batch.size(); ++b) {
    const MentionFeatures &f = batch[b];
    if (f.mention_string.size() != e || f.kb_types.size() != k) {
      throw Error(ErrorCode::kDimensionMismatch, "mention feature sizes");
    }
    auto row = input.row(b);
    std::copy(context.row(b).begin(), context.row(b).end(), row.begin());
    std::copy(f.mention_string.begin(), f.mention_string.end(), row.begin() + c);
    if (config_.use_el_features) {
      std::copy(f.kb_types.begin(), f.kb_types.end(), row.begin() + c + e);
      row[c + e + k] = f.confidence;
    }
  }
  return input;
}

Matrix TypingModel::Forward(std::span<const MentionFeatures> batch, Rng *rng,
                            Cache *cache) const {
  const bool train = rng != nullptr;
  const size_t n = batch.size();
  const size_t e = config_.embed_dim;
  std::vector<size_t> lengths(n), positions(n);
  size_t steps = 0;
  for (size_t b = 0; b < n; ++b) {
    lengths[b] = batch[b].context.size();
    positions[b] = batch[b].mention_position;
    if (positions[b] >= lengths[b] || batch[b].context[positions[b]] != kMentionSlot) {
      throw Error(ErrorCode::kSpanOutOfRange, "mention slot missing from context");
    }
    steps = std::max(steps, lengths[b]);
  }

  Matrix x(steps * n, e);
  for (size_t b = 0; b < n; ++b) {
    for (size_t t = 0; t < lengths[b]; ++t) {
      const size_t id = batch[b].context[t];
      std::span<const double> v =
          id == kMentionSlot ? layers_->mention_embedding.value.row(0)
          : id == EmbeddingTable::kUnknown ? layers_->unk_embedding.value.row(0)
                                           : embeddings_->Row(id);
      std::copy(v.begin(), v.end(), x.row(t * n + b).begin());
    }
  }

  const size_t h2 = 2 * config_.recurrent_hidden;
  Matrix context(n, h2);
  const size_t layers = layers_->recurrent.size();
  if (cache != nullptr) {
    cache->batch = n;
    cache->steps = steps;
    cache->lengths = lengths;
    cache->positions = positions;
    cache->recurrent_inputs.assign(layers, Matrix());
    cache->recurrent_masks.assign(layers, nn::DropoutMask());
    cache->recurrent_caches.assign(layers, nn::BiLstm::Cache());
  }
  Matrix input = std::move(x);
  for (size_t l = 0; l < layers; ++l) {
    if (l > 0) {
      nn::DropoutMask mask;
      input = nn::ApplyDropout(input, config_.inter_layer_dropout,
                               train ? rng : nullptr, mask);
      if (cache != nullptr) cache->recurrent_masks[l] = std::move(mask);
    }
    Matrix out = layers_->recurrent[l].Forward(
        input, lengths, cache ? &cache->recurrent_caches[l] : nullptr);
    for (size_t b = 0; b < n; ++b) {
      auto src = out.row(positions[b] * n + b);
      auto dst = context.row(b);
      for (size_t j = 0; j < h2; ++j) dst[j] += src[j];
    }
    if (cache != nullptr) cache->recurrent_inputs[l] = std::move(input);
    input = std::move(out);
  }

  Matrix hidden = FusionInput(batch, context);
  const size_t dense_layers = layers_->dense.size();
  if (cache != nullptr) {
    cache->dense_inputs.assign(dense_layers, Matrix());
    cache->norm_caches.assign(dense_layers, nn::BatchNorm::Cache());
    cache->dense_masks.assign(dense_layers, nn::DropoutMask());
    cache->activations.assign(dense_layers, Matrix());
  }
  for (size_t l = 0; l < dense_layers; ++l) {
    Matrix normalized;
    if (train) {
      nn::BatchNorm::Cache norm_cache;
      normalized = layers_->norms[l].ForwardBatchStats(hidden, norm_cache);
      if (cache != nullptr) cache->norm_caches[l] = std::move(norm_cache);
    } else {
      normalized = layers_->norms[l].ForwardEval(hidden);
    }
    nn::DropoutMask mask;
    Matrix dropped = nn::ApplyDropout(normalized, config_.dropout_rate,
                                      train ? rng : nullptr, mask);
    Matrix out = layers_->dense[l].Forward(dropped);
    if (cache != nullptr) {
      cache->dense_masks[l] = std::move(mask);
      cache->dense_inputs[l] = std::move(dropped);
      cache->activations[l] = out;
    }
    if (l + 1 < dense_layers) {
      for (double &v : out.values()) v = std::max(v, 0.0);
    }
    hidden = std::move(out);
  }

  Matrix scores(n, num_types_);
  nn::Gemm(false, true, 1.0, hidden, layers_->type_embeddings.value, scores);
  if (cache != nullptr) cache->mention_vectors = std::move(hidden);
  return scores;
}

Matrix TypingModel::Score(std::span<const MentionFeatures> batch) const {
  return Forward(batch, nullptr, nullptr);
}

Matrix TypingModel::ForwardTrain(std::span<const MentionFeatures> batch,
                                 Rng &rng, Cache &cache,
                                 bool update_statistics) {
  Matrix scores = Forward(batch, &rng, &cache);
  if (update_statistics) {
    for (size_t l = 0; l < layers_->norms.size(); ++l) {
      layers_->norms[l].UpdateStatistics(cache.norm_caches[l], batch.size());
    }
  }
  return scores;
}

void TypingModel::Backward(Cache &cache, const Matrix &d_scores) {
  const size_t n = cache.batch;
  Matrix d_hidden(n, config_.type_embed_dim);
  nn::Gemm(false, false, 1.0, d_scores, layers_->type_embeddings.value, d_hidden);
  nn::Gemm(true, false, 1.0, d_scores, cache.mention_vectors,
           layers_->type_embeddings.grad);

  for (size_t l = layers_->dense.size(); l-- > 0;) {
    if (l + 1 < layers_->dense.size()) {
      const Matrix &pre = cache.activations[l];
      for (size_t i = 0; i < d_hidden.size(); ++i) {
        if (pre.data()[i] <= 0.0) d_hidden.data()[i] = 0.0;
      }
    }
    Matrix d_dropped = layers_->dense[l].Backward(cache.dense_inputs[l], d_hidden);
    Matrix d_normalized = nn::BackwardDropout(cache.dense_masks[l], d_dropped);
    d_hidden = layers_->norms[l].Backward(cache.norm_caches[l], d_normalized);
  }

  // Only the context block of the fusion input reaches trainable parameters.
  const size_t h2 = 2 * config_.recurrent_hidden;
  const size_t layers = layers_->recurrent.size();
  Matrix d_out;
  for (size_t l = layers; l-- > 0;) {
    if (l + 1 == layers) d_out = Matrix(cache.steps * n, h2);
    for (size_t b = 0; b < n; ++b) {
      auto dst = d_out.row(cache.positions[b] * n + b);
      auto src = d_hidden.row(b);
      for (size_t j = 0; j < h2; ++j) dst[j] += src[j];
    }
    Matrix d_input = layers_->recurrent[l].Backward(cache.recurrent_caches[l], d_out);
    if (l > 0) {
      d_out = nn::BackwardDropout(cache.recurrent_masks[l], d_input);
    } else {
      d_out = std::move(d_input);
    }
  }
  auto d_mention = layers_->mention_embedding.grad.row(0);
  for (size_t b = 0; b < n; ++b) {
    auto src = d_out.row(cache.positions[b] * n + b);
    for (size_t j = 0; j < d_mention.size(); ++j) d_mention[j] += src[j];
  }
}

std::vector<double> TypingModel::EncodeContext(std::span<const std::string> tokens,
                                               TokenSpan span) const {
  MentionFeatures features;
  features.context = ContextTokenIds(*embeddings_, tokens, span);
  features.mention_position = span.start;
  const size_t n = 1, h2 = 2 * config_.recurrent_hidden;
  const size_t steps = features.context.size();
  Matrix x(steps, config_.embed_dim);
  for (size_t t = 0; t < steps; ++t) {
    const size_t id = features.context[t];
    std::span<const double> v =
        id == kMentionSlot ? layers_->mention_embedding.value.row(0)
        : id == EmbeddingTable::kUnknown ? layers_->unk_embedding.value.row(0)
                                         : embeddings_->Row(id);
    std::copy(v.begin(), v.end(), x.row(t).begin());
  }
  std::vector<double> context(h2, 0.0);
  const std::vector<size_t> lengths{steps};
  Matrix input = std::move(x);
  for (const nn::BiLstm &layer : layers_->recurrent) {
    Matrix out = layer.Forward(input, lengths, nullptr);
    auto row = out.row(span.start * n);
    for (size_t j = 0; j < h2; ++j) context[j] += row[j];
    input = std::move(out);
  }
  return context;
}

std::vector<double> TypingModel::EncodeMentionString(
    std::span<const std::string> tokens, TokenSpan span) const {
  return MentionStringVector(*embeddings_, tokens, span);
}

std::vector<double> TypingModel::ScoreTypes(std::span<const double> context,
                                            std::span<const double> mention_string,
                                            std::span<const double> kb_types,
                                            double confidence) const {
  if (context.size() != 2 * config_.recurrent_hidden ||
      mention_string.size() != config_.embed_dim || kb_types.size() != num_types_) {
    throw Error(ErrorCode::kDimensionMismatch, "score_types input sizes");
  }
  MentionFeatures features;
  features.mention_string.assign(mention_string.begin(), mention_string.end());
  features.kb_types.assign(kb_types.begin(), kb_types.end());
  features.confidence = confidence;
  Matrix context_row(1, context.size());
  std::copy(context.begin(), context.end(), context_row.data());
  Matrix hidden = FusionInput(std::span(&features, 1), context_row);
  for (size_t l = 0; l < layers_->dense.size(); ++l) {
    hidden = layers_->dense[l].Forward(layers_->norms[l].ForwardEval(hidden));
    if (l + 1 < layers_->dense.size()) {
      for (double &v : hidden.values()) v = std::max(v, 0.0);
    }
  }
  std::vector<double> scores(num_types_);
  for (size_t i = 0; i < num_types_; ++i) {
    scores[i] = kernels::Active().dot(hidden.data(),
                                      layers_->type_embeddings.value.row(i).data(),
                                      config_.type_embed_dim);
  }
  return scores;
}

namespace {

constexpr char kBlobMagic[8] = {'F', 'E', 'T', 'E', 'L', 'P', 'R', 'M'};
constexpr uint32_t kBlobVersion = 1;

template <typename T>
void WritePod(std::ostream &out, const T &value) {
  out.write(reinterpret_cast<const char *>(&value), sizeof(T));
}

template <typename T>
T ReadPod(std::istream &in, const std::string &path) {
  T value{};
  if (!in.read(reinterpret_cast<char *>(&value), sizeof(T))) {
    throw Error(ErrorCode::kIoFailure, path + ": truncated parameter blob");
  }
  return value;
}

}  // namespace

void TypingModel::SaveParameters(const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path);
  std::vector<nn::Parameter *> params = Parameters();
  out.write(kBlobMagic, sizeof(kBlobMagic));
  WritePod(out, kBlobVersion);
  WritePod(out, static_cast<uint32_t>(params.size()));
  for (const nn::Parameter *p : params) {
    WritePod(out, static_cast<uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    WritePod(out, static_cast<uint64_t>(p->value.rows()));
    WritePod(out, static_cast<uint64_t>(p->value.cols()));
    out.write(reinterpret_cast<const char *>(p->value.data()),
              static_cast<std::streamsize>(p->value.size() * sizeof(double)));
  }
  out.flush();
  if (!out) throw Error(ErrorCode::kIoFailure, "write failed: " + path);
}

void TypingModel::LoadParameters(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path);
  char magic[sizeof(kBlobMagic)];
  if (!in.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kBlobMagic, sizeof(magic)) != 0) {
    throw Error(ErrorCode::kFormatVersionMismatch, path + ": not a parameter blob");
  }
  if (ReadPod<uint32_t>(in, path) != kBlobVersion) {
    throw Error(ErrorCode::kFormatVersionMismatch, path + ": unsupported version");
  }
  std::vector<nn::Parameter *> params = Parameters();
  if (ReadPod<uint32_t>(in, path) != params.size()) {
    throw Error(ErrorCode::kFormatVersionMismatch,
                path + ": parameter count does not match the configuration");
  }
  std::vector<Matrix> loaded;
  for (const nn::Parameter *p : params) {
    const uint32_t name_size = ReadPod<uint32_t>(in, path);
    std::string name(name_size, '\0');
    if (!in.read(name.data(), name_size)) {
      throw Error(ErrorCode::kIoFailure, path + ": truncated parameter blob");
    }
    const uint64_t rows = ReadPod<uint64_t>(in, path);
    const uint64_t cols = ReadPod<uint64_t>(in, path);
    if (name != p->name || rows != p->value.rows() || cols != p->value.cols()) {
      throw Error(ErrorCode::kFormatVersionMismatch,
                  path + ": parameter " + name + " does not match " + p->name);
    }
    Matrix value(rows, cols);
    if (!in.read(reinterpret_cast<char *>(value.data()),
                 static_cast<std::streamsize>(value.size() * sizeof(double)))) {
      throw Error(ErrorCode::kIoFailure, path + ": truncated parameter blob");
    }
    loaded.push_back(std::move(value));
  }
  for (size_t i = 0; i < params.size(); ++i) params[i]->value = std::move(loaded[i]);
  const auto unk = layers_->unk_embedding.value.row(0);
  embeddings_->set_unk_vector(std::vector<double>(unk.begin(), unk.end()));
  const auto mention = layers_->mention_embedding.value.row(0);
  embeddings_->set_mention_vector(std::vector<double>(mention.begin(), mention.end()));
}

void Checkpoint::Save(const std::string &dir) const {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoFailure, "cannot create " + dir);
  json config = {{"format", "fetel-checkpoint"},
                 {"version", 1},
                 {"model", model_config.ToJson()},
                 {"embeddings", embeddings_path},
                 {"metadata", metadata}};
  std::ofstream out = OpenForWrite(dir + "/config.json");
  out << config.dump(2) << "\n";
  if (!out) throw Error(ErrorCode::kIoFailure, "write failed: " + dir);
  vocab.Save(dir + "/types.txt");
  mapping.Save(dir + "/mapping.tsv");
  model->SaveParameters(dir + "/parameters.bin");
}

Checkpoint Checkpoint::Load(const std::string &dir,
                            const std::optional<std::string> &embeddings_override) {
  std::ifstream in = OpenForRead(dir + "/config.json");
  json config = json::parse(in, nullptr, false);
  if (config.is_discarded() || config.value("format", "") != "fetel-checkpoint") {
    throw Error(ErrorCode::kFormatVersionMismatch, dir + ": not a checkpoint");
  }
  if (config.value("version", 0) != 1) {
    throw Error(ErrorCode::kFormatVersionMismatch, dir + ": unsupported version");
  }
  Checkpoint checkpoint;
  checkpoint.model_config = ModelConfig::FromJson(config.value("model", json::object()));
  checkpoint.embeddings_path =
      embeddings_override.value_or(config.value("embeddings", std::string()));
  checkpoint.metadata = config.value("metadata", json::object());
  checkpoint.vocab = TypeVocabulary::Load(dir + "/types.txt");
  checkpoint.mapping = KbTypeMapping::Load(dir + "/mapping.tsv", checkpoint.vocab);
  auto embeddings = std::make_shared<EmbeddingTable>(
      EmbeddingTable::Load(checkpoint.embeddings_path, checkpoint.model_config.seed));
  checkpoint.model = std::make_shared<TypingModel>(
      checkpoint.model_config, std::move(embeddings), checkpoint.vocab.size());
  checkpoint.model->LoadParameters(dir + "/parameters.bin");
  return checkpoint;
}

}  // namespace fetel
