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

#include "fetel/training.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fetel/entity_linker.h"
#include "fetel/error.h"
#include "fetel/kernels.h"

namespace fetel {

using nlohmann::json;

void TrainingConfig::Validate() const {
  auto require = [](bool ok, const char *what) {
    if (!ok) throw Error(ErrorCode::kInvalidConfig, what);
  };
  require(lambda_p >= 1.0, "lambda_p must be at least 1");
  require(nil_dropout_rate >= 0.0 && nil_dropout_rate <= 1.0,
          "nil_dropout_rate must lie in [0, 1]");
  require(batch_size > 0, "batch_size must be positive");
  require(learning_rate >= 0.0, "learning_rate must be nonnegative");
  require(max_epochs > 0, "max_epochs must be positive");
  require(patience > 0, "patience must be positive");
  require(gradient_clip_norm > 0.0, "gradient_clip_norm must be positive");
}

json TrainingConfig::ToJson() const {
  return {{"lambda_p", lambda_p},
          {"nil_dropout_rate", nil_dropout_rate},
          {"person_noise_enabled", person_noise_enabled},
          {"batch_size", batch_size},
          {"learning_rate", learning_rate},
          {"max_epochs", max_epochs},
          {"patience", patience},
          {"seed", seed},
          {"gradient_clip_norm", gradient_clip_norm},
          {"dev_policy", DecodePolicyName(dev_policy)}};
}

TrainingConfig TrainingConfig::FromJson(const json &j) {
  TrainingConfig c;
  try {
    c.lambda_p = j.value("lambda_p", c.lambda_p);
    c.nil_dropout_rate = j.value("nil_dropout_rate", c.nil_dropout_rate);
    c.person_noise_enabled = j.value("person_noise_enabled", c.person_noise_enabled);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.patience = j.value("patience", c.patience);
    c.seed = j.value("seed", c.seed);
    c.gradient_clip_norm = j.value("gradient_clip_norm", c.gradient_clip_norm);
    if (j.contains("dev_policy")) {
      c.dev_policy = ParseDecodePolicy(j["dev_policy"].get<std::string>());
    }
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("training config: ") + e.what());
  }
  return c;
}

double HingeLoss(std::span<const double> scores, const TypeSet &gold,
                 const TypeVocabulary &vocab, double lambda_p) {
  if (scores.size() != vocab.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "score vector size");
  }
  const std::vector<double> bits = vocab.OneHot(gold);
  const std::vector<double> weights = vocab.PenaltyWeights(lambda_p);
  double loss = 0.0;
  for (size_t i = 0; i < scores.size(); ++i) {
    loss += bits[i] != 0.0 ? std::max(0.0, 1.0 - scores[i])
                           : weights[i] * std::max(0.0, 1.0 + scores[i]);
  }
  return loss;
}

double HingeLossWithGradient(std::span<const double> scores,
                             std::span<const double> gold_bits,
                             std::span<const double> weights, double grad_scale,
                             std::span<double> grad) {
  double loss = 0.0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (gold_bits[i] != 0.0) {
      const double margin = 1.0 - scores[i];
      loss += std::max(0.0, margin);
      grad[i] = margin > 0.0 ? -grad_scale : 0.0;
    } else {
      const double margin = 1.0 + scores[i];
      loss += weights[i] * std::max(0.0, margin);
      grad[i] = margin > 0.0 ? weights[i] * grad_scale : 0.0;
    }
  }
  return loss;
}

TypeSet InjectPersonTypeNoise(const TypeSet &kb_label_set,
                              const EntityRecord &entity,
                              const TypeVocabulary &vocab, Rng &rng) {
  if (!entity.is_person) return kb_label_set;
  std::vector<size_t> unused;
  for (size_t index : vocab.person_fine_types()) {
    if (kb_label_set.count(vocab.type(index)) == 0) unused.push_back(index);
  }
  if (unused.empty()) return kb_label_set;
  TypeSet noised = kb_label_set;
  noised.insert(vocab.type(unused[rng.UniformInt(unused.size())]));
  return PrefixClosure(noised);
}

size_t ApplyNilDropout(std::span<LinkResult> links, double rate, Rng &rng) {
  size_t dropped = 0;
  for (LinkResult &link : links) {
    if (!rng.Bernoulli(rate)) continue;
    if (!link.is_nil()) ++dropped;
    link = LinkResult::Nil(link.resolved_surface);
  }
  return dropped;
}

void AdamOptimizer::Step(std::span<nn::Parameter *const> params) {
  if (first_moment_.size() != params.size()) {
    first_moment_.clear();
    second_moment_.clear();
    for (const nn::Parameter *p : params) {
      first_moment_.emplace_back(p->value.rows(), p->value.cols());
      second_moment_.emplace_back(p->value.rows(), p->value.cols());
    }
  }
  ++steps_;
  const kernels::AdamStep step{
      learning_rate_, kBeta1, kBeta2, kEpsilon,
      1.0 - std::pow(kBeta1, static_cast<double>(steps_)),
      1.0 - std::pow(kBeta2, static_cast<double>(steps_))};
  for (size_t i = 0; i < params.size(); ++i) {
    nn::Parameter *p = params[i];
    if (!p->trainable) continue;
    kernels::Active().adam(p->value.data(), p->grad.data(),
                           first_moment_[i].data(), second_moment_[i].data(),
                           p->value.size(), step);
  }
}

double ClipGradientNorm(std::span<nn::Parameter *const> params, double max_norm) {
  double sum = 0.0;
  for (const nn::Parameter *p : params) {
    if (!p->trainable) continue;
    sum += kernels::Active().dot(p->grad.data(), p->grad.data(), p->grad.size());
  }
  const double norm = std::sqrt(sum);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (nn::Parameter *p : params) {
      if (!p->trainable) continue;
      for (double &g : p->grad.values()) g *= scale;
    }
  }
  return norm;
}

json EpochLog::ToJson() const {
  json out = {{"epoch", epoch},
              {"loss", loss},
              {"nil_dropped", nil_dropped},
              {"person_noised", person_noised}};
  if (dev) {
    out["dev_strict"] = dev->strict_accuracy;
    out["dev_macro_f1"] = dev->macro.f1;
    out["dev_micro_f1"] = dev->micro.f1;
  } else {
    out["dev_strict"] = nullptr;
    out["dev_macro_f1"] = nullptr;
    out["dev_micro_f1"] = nullptr;
  }
  return out;
}

TrainingFeaturizer::TrainingFeaturizer(const TypingModel &model,
                                       const KnowledgeBase &kb,
                                       const KbTypeMapping &mapping,
                                       const TypeVocabulary &vocab,
                                       std::span<const MentionExample> examples)
    : kb_(kb), vocab_(vocab), links_(LinkCorpus(kb, examples)) {
  base_.reserve(examples.size());
  kb_label_sets_.reserve(examples.size());
  for (size_t i = 0; i < examples.size(); ++i) {
    base_.push_back(Featurize(examples[i], links_[i], kb, mapping, vocab,
                              model.embeddings()));
    kb_label_sets_.push_back(links_[i].is_nil()
                                 ? TypeSet()
                                 : vocab.Decode(base_.back().kb_types));
  }
}

std::vector<MentionFeatures> TrainingFeaturizer::Sample(double nil_rate,
                                                        bool person_noise,
                                                        Rng &rng,
                                                        Counts *counts) const {
  std::vector<LinkResult> links = links_;
  Counts local;
  local.nil_dropped = ApplyNilDropout(links, nil_rate, rng);
  std::vector<MentionFeatures> features = base_;
  for (size_t i = 0; i < features.size(); ++i) {
    MentionFeatures &f = features[i];
    if (links[i].is_nil()) {
      std::fill(f.kb_types.begin(), f.kb_types.end(), 0.0);
      f.confidence = 0.0;
      continue;
    }
    if (!person_noise) continue;
    const EntityRecord &entity = kb_.Entity(*links[i].entity_id);
    if (!entity.is_person) continue;
    TypeSet noised = InjectPersonTypeNoise(kb_label_sets_[i], entity, vocab_, rng);
    if (noised.size() != kb_label_sets_[i].size()) ++local.person_noised;
    f.kb_types = vocab_.OneHot(noised);
  }
  if (counts != nullptr) *counts = local;
  return features;
}

Trainer::Trainer(TypingModel &model, const KnowledgeBase &kb,
                 const KbTypeMapping &mapping, const TypeVocabulary &vocab,
                 const TrainingConfig &config)
    : model_(model), kb_(kb), mapping_(mapping), vocab_(vocab), config_(config) {
  config_.Validate();
}

TrainingResult Trainer::Train(std::span<const MentionExample> train_set,
                              std::span<const MentionExample> dev_set,
                              const std::function<void(const EpochLog &)> &on_epoch) {
  if (train_set.empty()) throw Error(ErrorCode::kEmptyCorpus, "empty training set");
  for (const MentionExample &example : train_set) {
    if (example.labels.empty()) {
      throw Error(ErrorCode::kEmptyCorpus, "training example without labels");
    }
  }

  Rng rng(config_.seed);
  const TrainingFeaturizer featurizer(model_, kb_, mapping_, vocab_, train_set);
  std::vector<LinkResult> dev_links = LinkCorpus(kb_, dev_set);
  const size_t k = vocab_.size();
  std::vector<std::vector<double>> gold_bits;
  gold_bits.reserve(train_set.size());
  for (const MentionExample &example : train_set) {
    gold_bits.push_back(vocab_.OneHot(PrefixClosure(example.labels)));
  }
  const std::vector<double> weights = vocab_.PenaltyWeights(config_.lambda_p);

  std::vector<nn::Parameter *> params = model_.Parameters();
  AdamOptimizer optimizer(config_.learning_rate);
  std::vector<Matrix> best_values;
  TrainingResult result;
  bool have_best = false;
  size_t stale_epochs = 0;

  std::vector<size_t> order(train_set.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (size_t epoch = 1; epoch <= config_.max_epochs; ++epoch) {
    TrainingFeaturizer::Counts counts;
    std::vector<MentionFeatures> features = featurizer.Sample(
        config_.nil_dropout_rate, config_.person_noise_enabled, rng, &counts);
    rng.Shuffle(order);

    double epoch_loss = 0.0;
    for (size_t start = 0; start < order.size(); start += config_.batch_size) {
      const size_t end = std::min(order.size(), start + config_.batch_size);
      const size_t n = end - start;
      std::vector<MentionFeatures> batch;
      batch.reserve(n);
      for (size_t i = start; i < end; ++i) batch.push_back(features[order[i]]);

      model_.ZeroGrad();
      TypingModel::Cache cache;
      Matrix scores = model_.ForwardTrain(batch, rng, cache);
      Matrix d_scores(n, k);
      double batch_loss = 0.0;
      for (size_t b = 0; b < n; ++b) {
        batch_loss += HingeLossWithGradient(scores.row(b), gold_bits[order[start + b]],
                                            weights, 1.0 / static_cast<double>(n),
                                            d_scores.row(b));
      }
      // max(0, NaN) is 0, so non-finite scores are checked directly.
      const bool finite_scores = std::all_of(
          scores.values().begin(), scores.values().end(),
          [](double v) { return std::isfinite(v); });
      if (!finite_scores || !std::isfinite(batch_loss)) {
        std::ostringstream message;
        message << "epoch " << epoch << ", batch starting at " << start
                << ": loss " << batch_loss;
        throw Error(ErrorCode::kNonFiniteLoss, message.str());
      }
      epoch_loss += batch_loss;
      model_.Backward(cache, d_scores);
      ClipGradientNorm(params, config_.gradient_clip_norm);
      optimizer.Step(params);
    }

    EpochLog log;
    log.epoch = epoch;
    log.loss = epoch_loss / static_cast<double>(train_set.size());
    log.nil_dropped = counts.nil_dropped;
    log.person_noised = counts.person_noised;
    bool improved = false;
    if (!dev_set.empty()) {
      std::vector<Prediction> predictions = PredictWithLinks(
          model_, dev_set, dev_links, kb_, mapping_, vocab_, config_.dev_policy);
      std::vector<LabelPair> pairs;
      pairs.reserve(dev_set.size());
      for (size_t i = 0; i < dev_set.size(); ++i) {
        pairs.push_back({PrefixClosure(dev_set[i].labels),
                         std::move(predictions[i].labels)});
      }
      log.dev = ComputeReport(std::move(pairs));
      log.dev->records.clear();
      improved = !have_best || log.dev->strict_accuracy > result.best_dev_strict;
    } else {
      improved = true;
    }
    if (improved) {
      have_best = true;
      result.best_epoch = epoch;
      result.best_dev_strict = log.dev ? log.dev->strict_accuracy : 0.0;
      best_values.clear();
      for (const nn::Parameter *p : params) best_values.push_back(p->value);
      stale_epochs = 0;
    } else {
      ++stale_epochs;
    }
    result.log.push_back(log);
    if (on_epoch) on_epoch(log);
    if (stale_epochs >= config_.patience) break;
  }
  for (size_t i = 0; i < params.size(); ++i) params[i]->value = best_values[i];
  return result;
}

}  // namespace fetel
