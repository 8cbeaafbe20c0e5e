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

#ifndef FETEL_NN_H_
#define FETEL_NN_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fetel/random.h"
#include "fetel/tensor.h"

// Layers with hand-written backward passes. Forward calls are const and keep
// their intermediate values in caller-owned cache structs, so a frozen model
// can serve concurrent inference; training is single-writer.
namespace fetel::nn {

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  // Buffers such as normalization statistics are saved but not optimized.
  bool trainable = true;

  Parameter() = default;
  Parameter(std::string n, size_t rows, size_t cols, bool is_trainable = true)
      : name(std::move(n)), value(rows, cols), grad(rows, cols),
        trainable(is_trainable) {}
};

void InitUniform(Matrix &m, double bound, Rng &rng);

// C += alpha * op(A) * op(B) over whole matrices using the active kernels.
void Gemm(bool trans_a, bool trans_b, double alpha, const Matrix &a,
          const Matrix &b, Matrix &c);

// y = x W + b with W stored in x out.
class Linear {
 public:
  Linear() = default;
  Linear(const std::string &name, size_t in, size_t out);

  void Init(Rng &rng);
  Matrix Forward(const Matrix &x) const;
  // Accumulates parameter gradients and returns dL/dx.
  Matrix Backward(const Matrix &x, const Matrix &dy);

  size_t in() const { return weight_.value.rows(); }
  size_t out() const { return weight_.value.cols(); }
  void Collect(std::vector<Parameter *> &out);

  Parameter &weight() { return weight_; }
  Parameter &bias() { return bias_; }

 private:
  Parameter weight_;
  Parameter bias_;
};

// Per-feature batch normalization with learned scale and shift.
class BatchNorm {
 public:
  static constexpr double kEpsilon = 1e-5;
  static constexpr double kMomentum = 0.1;

  struct Cache {
    Matrix normalized;
    std::vector<double> mean;
    std::vector<double> var;
    std::vector<double> inv_std;
  };

  BatchNorm() = default;
  BatchNorm(const std::string &name, size_t dim);

  // Normalizes with the batch's own statistics.
  Matrix ForwardBatchStats(const Matrix &x, Cache &cache) const;
  // Folds a batch's statistics into the running estimates.
  void UpdateStatistics(const Cache &cache, size_t batch);
  Matrix ForwardEval(const Matrix &x) const;
  Matrix Backward(const Cache &cache, const Matrix &dy);

  void Collect(std::vector<Parameter *> &out);

 private:
  Parameter gamma_;
  Parameter beta_;
  Parameter running_mean_;
  Parameter running_var_;
};

// Inverted dropout; the mask already includes the 1/(1-rate) scale.
struct DropoutMask {
  Matrix scale;
  bool active = false;
};

Matrix ApplyDropout(const Matrix &x, double rate, Rng *rng, DropoutMask &mask);
Matrix BackwardDropout(const DropoutMask &mask, const Matrix &dy);

// Unidirectional LSTM over a padded batch laid out time-major: row t * batch
// + b holds step t of sequence b. Gate order is input, forget, cell, output.
class Lstm {
 public:
  struct Cache {
    size_t steps = 0;
    size_t batch = 0;
    Matrix input;
    Matrix gates;  // activated gate values
    Matrix cells;
    Matrix tanh_cells;
    Matrix hidden;
  };

  Lstm() = default;
  Lstm(const std::string &name, size_t in, size_t hidden);

  void Init(Rng &rng);
  Matrix Forward(const Matrix &x, size_t steps, size_t batch,
                 Cache *cache) const;
  Matrix Backward(const Cache &cache, const Matrix &d_hidden);

  size_t in() const { return input_weight_.value.rows(); }
  size_t hidden() const { return recurrent_weight_.value.rows(); }
  void Collect(std::vector<Parameter *> &out);

 private:
  Parameter input_weight_;      // in x 4h
  Parameter recurrent_weight_;  // h x 4h
  Parameter bias_;              // 1 x 4h
};

// Bidirectional LSTM over variable-length sequences. Inputs and outputs use
// the time-major padded layout with natural positions; padded rows are zero
// on output. Each output row is [forward ; backward] (2 * hidden wide).
class BiLstm {
 public:
  struct Cache {
    std::vector<size_t> lengths;
    size_t steps = 0;
    Lstm::Cache forward;
    Lstm::Cache backward;
  };

  BiLstm() = default;
  BiLstm(const std::string &name, size_t in, size_t hidden);

  void Init(Rng &rng);
  Matrix Forward(const Matrix &x, std::span<const size_t> lengths,
                 Cache *cache) const;
  Matrix Backward(const Cache &cache, const Matrix &d_out);

  size_t out() const { return 2 * forward_.hidden(); }
  void Collect(std::vector<Parameter *> &out);

 private:
  Lstm forward_;
  Lstm backward_;
};

}  // namespace fetel::nn

#endif  // FETEL_NN_H_
