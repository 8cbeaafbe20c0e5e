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

#ifndef FETEL_TESTS_SUPPORT_TINY_MODEL_H_
#define FETEL_TESTS_SUPPORT_TINY_MODEL_H_

#include <memory>
#include <string>
#include <vector>

#include "fetel/corpus.h"
#include "fetel/mention.h"
#include "fetel/random.h"
#include "fetel/typing_model.h"

namespace fetel::testing {

// Words "v0".."v{n-1}" with uniform(-1, 1) vectors.
std::shared_ptr<EmbeddingTable> TinyEmbeddings(size_t words, size_t dim, uint64_t seed);

// Writes a table in the text format with round-trip precision.
void SaveEmbeddings(const EmbeddingTable &table, const std::string &path);

// embed 8, recurrent hidden 6, MLP hidden 10, type embed 10, dropout off.
ModelConfig TinyConfig();

// A random sentence over the tiny vocabulary (plus the occasional unknown
// word) with a random span.
MentionExample RandomMention(Rng &rng, size_t words);

// Features with random KB bits and confidence.
MentionFeatures RandomFeatures(Rng &rng, const EmbeddingTable &table, size_t words,
                               size_t num_types);

}  // namespace fetel::testing

#endif  // FETEL_TESTS_SUPPORT_TINY_MODEL_H_
