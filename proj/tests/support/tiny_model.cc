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

#include "support/tiny_model.h"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace fetel::testing {

std::shared_ptr<EmbeddingTable> TinyEmbeddings(size_t words, size_t dim, uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> names;
  Matrix vectors(words, dim);
  for (size_t w = 0; w < words; ++w) names.push_back("v" + std::to_string(w));
  for (double &v : vectors.values()) v = rng.Uniform(-1.0, 1.0);
  return std::make_shared<EmbeddingTable>(names, vectors, seed);
}

void SaveEmbeddings(const EmbeddingTable &table, const std::string &path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  char buf[32];
  for (size_t w = 0; w < table.num_words(); ++w) {
    out << table.words()[w];
    for (double v : table.Row(w)) {
      std::snprintf(buf, sizeof(buf), " %.17g", v);
      out << buf;
    }
    out << "\n";
  }
}

ModelConfig TinyConfig() {
  ModelConfig c;
  c.embed_dim = 8;
  c.recurrent_hidden = 6;
  c.mlp_hidden = 10;
  c.type_embed_dim = 10;
  c.dropout_rate = 0.0;
  c.seed = 3;
  return c;
}

MentionExample RandomMention(Rng &rng, size_t words) {
  MentionExample m;
  m.doc_id = "d" + std::to_string(rng.UniformInt(1000000));
  const size_t n = 1 + rng.UniformInt(7);
  for (size_t i = 0; i < n; ++i) {
    m.tokens.push_back(rng.Bernoulli(0.1) ? "oov" : "v" + std::to_string(rng.UniformInt(words)));
  }
  const size_t start = rng.UniformInt(n);
  m.span = {start, start + 1 + rng.UniformInt(n - start)};
  return m;
}

MentionFeatures RandomFeatures(Rng &rng, const EmbeddingTable &table, size_t words,
                               size_t num_types) {
  const MentionExample m = RandomMention(rng, words);
  MentionFeatures f;
  f.context = ContextTokenIds(table, m.tokens, m.span);
  f.mention_position = m.span.start;
  f.mention_string = MentionStringVector(table, m.tokens, m.span);
  f.kb_types.resize(num_types);
  for (double &b : f.kb_types) b = rng.Bernoulli(0.5) ? 1.0 : 0.0;
  f.confidence = rng.Uniform();
  return f;
}

}  // namespace fetel::testing
