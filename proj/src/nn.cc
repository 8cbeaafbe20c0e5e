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

#include "fetel/nn.h"

#include <cmath>

#include "fetel/kernels.h"

namespace fetel::nn {
namespace {

double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void AddRowVector(Matrix &m, const Matrix &row) {
  for (size_t r = 0; r < m.rows(); ++r) {
    kernels::Active().axpy(1.0, row.data(), m.row(r).data(), m.cols());
  }
}

void AccumulateColumnSums(const Matrix &m, Matrix &out) {
  for (size_t r = 0; r < m.rows(); ++r) {
    kernels::Active().axpy(1.0, m.row(r).data(), out.data(), m.cols());
  }
}

// Row t*batch+b of the result is row (length_b-1-t)*batch+b of x for
// t < length_b and zero otherwise. The map is its own inverse.
Matrix ReverseSequences(const Matrix &x, std::span<const size_t> lengths,
                        size_t steps) {
  const size_t batch = lengths.size();
  Matrix out(x.rows(), x.cols());
  for (size_t b = 0; b < batch; ++b) {
    for (size_t t = 0; t < lengths[b]; ++t) {
      auto src = x.row((lengths[b] - 1 - t) * batch + b);
      std::copy(src.begin(), src.end(), out.row(t * batch + b).begin());
    }
  }
  (void)steps;
  return out;
}

void ZeroPadding(Matrix &x, std::span<const size_t> lengths, size_t steps) {
  const size_t batch = lengths.size();
  for (size_t b = 0; b < batch; ++b) {
    for (size_t t = lengths[b]; t < steps; ++t) {
      auto row = x.row(t * batch + b);
      std::fill(row.begin(), row.end(), 0.0);
    }
  }
}

}  // namespace

void InitUniform(Matrix &m, double bound, Rng &rng) {
  for (double &v : m.values()) v = rng.Uniform(-bound, bound);
}

void Gemm(bool trans_a, bool trans_b, double alpha, const Matrix &a,
          const Matrix &b, Matrix &c) {
  const size_t m = trans_a ? a.cols() : a.rows();
  const size_t k = trans_a ? a.rows() : a.cols();
  const size_t n = trans_b ? b.rows() : b.cols();
  assert(k == (trans_b ? b.cols() : b.rows()));
  assert(c.rows() == m && c.cols() == n);
  kernels::Active().gemm(trans_a, trans_b, m, n, k, alpha, a.data(), a.cols(),
                         b.data(), b.cols(), c.data(), c.cols());
}

Linear::Linear(const std::string &name, size_t in, size_t out)
    : weight_(name + ".weight", in, out), bias_(name + ".bias", 1, out) {}

void Linear::Init(Rng &rng) {
  // Glorot-style uniform bound.
  const double bound = std::sqrt(6.0 / static_cast<double>(in() + out()));
  InitUniform(weight_.value, bound, rng);
  bias_.value.Fill(0.0);
}

Matrix Linear::Forward(const Matrix &x) const {
  Matrix y(x.rows(), out());
  Gemm(false, false, 1.0, x, weight_.value, y);
  AddRowVector(y, bias_.value);
  return y;
}

Matrix Linear::Backward(const Matrix &x, const Matrix &dy) {
  Gemm(true, false, 1.0, x, dy, weight_.grad);
  AccumulateColumnSums(dy, bias_.grad);
  Matrix dx(x.rows(), in());
  Gemm(false, true, 1.0, dy, weight_.value, dx);
  return dx;
}

void Linear::Collect(std::vector<Parameter *> &out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

BatchNorm::BatchNorm(const std::string &name, size_t dim)
    : gamma_(name + ".gamma", 1, dim),
      beta_(name + ".beta", 1, dim),
      running_mean_(name + ".running_mean", 1, dim, false),
      running_var_(name + ".running_var", 1, dim, false) {
  gamma_.value.Fill(1.0);
  running_var_.value.Fill(1.0);
}

Matrix BatchNorm::ForwardBatchStats(const Matrix &x, Cache &cache) const {
  const size_t batch = x.rows(), dim = x.cols();
  std::vector<double> mean(dim, 0.0), var(dim, 0.0);
  for (size_t r = 0; r < batch; ++r) {
    for (size_t j = 0; j < dim; ++j) mean[j] += x(r, j);
  }
  for (double &m : mean) m /= static_cast<double>(batch);
  for (size_t r = 0; r < batch; ++r) {
    for (size_t j = 0; j < dim; ++j) {
      const double d = x(r, j) - mean[j];
      var[j] += d * d;
    }
  }
  for (double &v : var) v /= static_cast<double>(batch);
  cache.mean = mean;
  cache.var = var;
  cache.inv_std.resize(dim);
  for (size_t j = 0; j < dim; ++j) {
    cache.inv_std[j] = 1.0 / std::sqrt(var[j] + kEpsilon);
  }
  cache.normalized.Resize(batch, dim);
  Matrix y(batch, dim);
  for (size_t r = 0; r < batch; ++r) {
    for (size_t j = 0; j < dim; ++j) {
      const double n = (x(r, j) - mean[j]) * cache.inv_std[j];
      cache.normalized(r, j) = n;
      y(r, j) = gamma_.value(0, j) * n + beta_.value(0, j);
    }
  }
  return y;
}

void BatchNorm::UpdateStatistics(const Cache &cache, size_t batch) {
  const double unbias =
      batch > 1 ? static_cast<double>(batch) / static_cast<double>(batch - 1) : 1.0;
  for (size_t j = 0; j < cache.mean.size(); ++j) {
    running_mean_.value(0, j) =
        (1.0 - kMomentum) * running_mean_.value(0, j) + kMomentum * cache.mean[j];
    running_var_.value(0, j) = (1.0 - kMomentum) * running_var_.value(0, j) +
                               kMomentum * cache.var[j] * unbias;
  }
}

Matrix BatchNorm::ForwardEval(const Matrix &x) const {
  Matrix y(x.rows(), x.cols());
  for (size_t j = 0; j < x.cols(); ++j) {
    const double inv = 1.0 / std::sqrt(running_var_.value(0, j) + kEpsilon);
    const double scale = gamma_.value(0, j) * inv;
    const double shift = beta_.value(0, j) - running_mean_.value(0, j) * scale;
    for (size_t r = 0; r < x.rows(); ++r) y(r, j) = x(r, j) * scale + shift;
  }
  return y;
}

Matrix BatchNorm::Backward(const Cache &cache, const Matrix &dy) {
  const size_t batch = dy.rows(), dim = dy.cols();
  const double n = static_cast<double>(batch);
  Matrix dx(batch, dim);
  for (size_t j = 0; j < dim; ++j) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (size_t r = 0; r < batch; ++r) {
      sum_dy += dy(r, j);
      sum_dy_xhat += dy(r, j) * cache.normalized(r, j);
    }
    gamma_.grad(0, j) += sum_dy_xhat;
    beta_.grad(0, j) += sum_dy;
    const double g = gamma_.value(0, j);
    const double scale = g * cache.inv_std[j] / n;
    for (size_t r = 0; r < batch; ++r) {
      dx(r, j) = scale * (n * dy(r, j) - sum_dy -
                          cache.normalized(r, j) * sum_dy_xhat);
    }
  }
  return dx;
}

void BatchNorm::Collect(std::vector<Parameter *> &out) {
  out.push_back(&gamma_);
  out.push_back(&beta_);
  out.push_back(&running_mean_);
  out.push_back(&running_var_);
}

Matrix ApplyDropout(const Matrix &x, double rate, Rng *rng, DropoutMask &mask) {
  if (rng == nullptr || rate <= 0.0) {
    mask.active = false;
    return x;
  }
  mask.active = true;
  mask.scale.Resize(x.rows(), x.cols());
  const double keep = 1.0 - rate;
  Matrix y(x.rows(), x.cols());
  for (size_t i = 0; i < x.size(); ++i) {
    const double s = rng->Bernoulli(keep) ? 1.0 / keep : 0.0;
    mask.scale.data()[i] = s;
    y.data()[i] = x.data()[i] * s;
  }
  return y;
}

Matrix BackwardDropout(const DropoutMask &mask, const Matrix &dy) {
  if (!mask.active) return dy;
  Matrix dx(dy.rows(), dy.cols());
  for (size_t i = 0; i < dy.size(); ++i) {
    dx.data()[i] = dy.data()[i] * mask.scale.data()[i];
  }
  return dx;
}

Lstm::Lstm(const std::string &name, size_t in, size_t hidden)
    : input_weight_(name + ".input_weight", in, 4 * hidden),
      recurrent_weight_(name + ".recurrent_weight", hidden, 4 * hidden),
      bias_(name + ".bias", 1, 4 * hidden) {}

void Lstm::Init(Rng &rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden()));
  InitUniform(input_weight_.value, bound, rng);
  InitUniform(recurrent_weight_.value, bound, rng);
  bias_.value.Fill(0.0);
  // Forget gate starts open.
  for (size_t j = hidden(); j < 2 * hidden(); ++j) bias_.value(0, j) = 1.0;
}

Matrix Lstm::Forward(const Matrix &x, size_t steps, size_t batch,
                     Cache *cache) const {
  const size_t h = hidden(), rows = steps * batch;
  Matrix gates(rows, 4 * h);
  Gemm(false, false, 1.0, x, input_weight_.value, gates);
  AddRowVector(gates, bias_.value);
  Matrix cells(rows, h), tanh_cells(rows, h), out(rows, h);

  const auto &k = kernels::Active();
  for (size_t t = 0; t < steps; ++t) {
    double *g = gates.data() + t * batch * 4 * h;
    if (t > 0) {
      k.gemm(false, false, batch, 4 * h, h, 1.0,
             out.data() + (t - 1) * batch * h, h,
             recurrent_weight_.value.data(), 4 * h, g, 4 * h);
    }
    for (size_t b = 0; b < batch; ++b) {
      double *gb = g + b * 4 * h;
      const double *c_prev = t > 0 ? cells.data() + ((t - 1) * batch + b) * h : nullptr;
      double *c = cells.data() + (t * batch + b) * h;
      double *tc = tanh_cells.data() + (t * batch + b) * h;
      double *hb = out.data() + (t * batch + b) * h;
      for (size_t j = 0; j < h; ++j) {
        const double i_gate = Sigmoid(gb[j]);
        const double f_gate = Sigmoid(gb[h + j]);
        const double c_gate = std::tanh(gb[2 * h + j]);
        const double o_gate = Sigmoid(gb[3 * h + j]);
        gb[j] = i_gate;
        gb[h + j] = f_gate;
        gb[2 * h + j] = c_gate;
        gb[3 * h + j] = o_gate;
        c[j] = (c_prev ? f_gate * c_prev[j] : 0.0) + i_gate * c_gate;
        tc[j] = std::tanh(c[j]);
        hb[j] = o_gate * tc[j];
      }
    }
  }
  if (cache != nullptr) {
    cache->steps = steps;
    cache->batch = batch;
    cache->input = x;
    cache->gates = std::move(gates);
    cache->cells = std::move(cells);
    cache->tanh_cells = std::move(tanh_cells);
    cache->hidden = out;
  }
  return out;
}

Matrix Lstm::Backward(const Cache &cache, const Matrix &d_hidden) {
  const size_t h = hidden(), steps = cache.steps, batch = cache.batch;
  const size_t rows = steps * batch;
  Matrix d_gates(rows, 4 * h);
  Matrix dh_next(batch, h), dc_next(batch, h);
  const auto &k = kernels::Active();
  for (size_t t = steps; t-- > 0;) {
    for (size_t b = 0; b < batch; ++b) {
      const size_t row = t * batch + b;
      const double *gb = cache.gates.data() + row * 4 * h;
      const double *tc = cache.tanh_cells.data() + row * h;
      const double *c_prev =
          t > 0 ? cache.cells.data() + ((t - 1) * batch + b) * h : nullptr;
      const double *dh_out = d_hidden.data() + row * h;
      double *dg = d_gates.data() + row * 4 * h;
      double *dhn = dh_next.data() + b * h;
      double *dcn = dc_next.data() + b * h;
      for (size_t j = 0; j < h; ++j) {
        const double i_gate = gb[j], f_gate = gb[h + j];
        const double c_gate = gb[2 * h + j], o_gate = gb[3 * h + j];
        const double dh = dh_out[j] + dhn[j];
        const double dc = dcn[j] + dh * o_gate * (1.0 - tc[j] * tc[j]);
        dg[j] = dc * c_gate * i_gate * (1.0 - i_gate);
        dg[h + j] = c_prev ? dc * c_prev[j] * f_gate * (1.0 - f_gate) : 0.0;
        dg[2 * h + j] = dc * i_gate * (1.0 - c_gate * c_gate);
        dg[3 * h + j] = dh * tc[j] * o_gate * (1.0 - o_gate);
        dcn[j] = dc * f_gate;
      }
    }
    dh_next.Fill(0.0);
    if (t > 0) {
      k.gemm(false, true, batch, h, 4 * h, 1.0,
             d_gates.data() + t * batch * 4 * h, 4 * h,
             recurrent_weight_.value.data(), 4 * h, dh_next.data(), h);
    }
  }
  Gemm(true, false, 1.0, cache.input, d_gates, input_weight_.grad);
  AccumulateColumnSums(d_gates, bias_.grad);
  if (steps > 1) {
    k.gemm(true, false, h, 4 * h, (steps - 1) * batch, 1.0,
           cache.hidden.data(), h, d_gates.data() + batch * 4 * h, 4 * h,
           recurrent_weight_.grad.data(), 4 * h);
  }
  Matrix dx(rows, in());
  Gemm(false, true, 1.0, d_gates, input_weight_.value, dx);
  return dx;
}

void Lstm::Collect(std::vector<Parameter *> &out) {
  out.push_back(&input_weight_);
  out.push_back(&recurrent_weight_);
  out.push_back(&bias_);
}

BiLstm::BiLstm(const std::string &name, size_t in, size_t hidden)
    : forward_(name + ".forward", in, hidden),
      backward_(name + ".backward", in, hidden) {}

void BiLstm::Init(Rng &rng) {
  forward_.Init(rng);
  backward_.Init(rng);
}

Matrix BiLstm::Forward(const Matrix &x, std::span<const size_t> lengths,
                       Cache *cache) const {
  const size_t batch = lengths.size();
  const size_t steps = batch == 0 ? 0 : x.rows() / batch;
  const size_t h = forward_.hidden();
  Matrix reversed = ReverseSequences(x, lengths, steps);
  Matrix fwd = forward_.Forward(x, steps, batch,
                                cache ? &cache->forward : nullptr);
  Matrix bwd = backward_.Forward(reversed, steps, batch,
                                 cache ? &cache->backward : nullptr);
  bwd = ReverseSequences(bwd, lengths, steps);
  Matrix out(x.rows(), 2 * h);
  for (size_t r = 0; r < x.rows(); ++r) {
    std::copy(fwd.row(r).begin(), fwd.row(r).end(), out.row(r).begin());
    std::copy(bwd.row(r).begin(), bwd.row(r).end(), out.row(r).begin() + h);
  }
  ZeroPadding(out, lengths, steps);
  if (cache != nullptr) {
    cache->lengths.assign(lengths.begin(), lengths.end());
    cache->steps = steps;
  }
  return out;
}

Matrix BiLstm::Backward(const Cache &cache, const Matrix &d_out) {
  const size_t h = forward_.hidden();
  Matrix d_fwd(d_out.rows(), h), d_bwd(d_out.rows(), h);
  for (size_t r = 0; r < d_out.rows(); ++r) {
    auto row = d_out.row(r);
    std::copy(row.begin(), row.begin() + h, d_fwd.row(r).begin());
    std::copy(row.begin() + h, row.end(), d_bwd.row(r).begin());
  }
  ZeroPadding(d_fwd, cache.lengths, cache.steps);
  ZeroPadding(d_bwd, cache.lengths, cache.steps);
  d_bwd = ReverseSequences(d_bwd, cache.lengths, cache.steps);
  Matrix dx = forward_.Backward(cache.forward, d_fwd);
  Matrix dx_rev = ReverseSequences(backward_.Backward(cache.backward, d_bwd),
                                   cache.lengths, cache.steps);
  for (size_t i = 0; i < dx.size(); ++i) dx.data()[i] += dx_rev.data()[i];
  ZeroPadding(dx, cache.lengths, cache.steps);
  return dx;
}

void BiLstm::Collect(std::vector<Parameter *> &out) {
  forward_.Collect(out);
  backward_.Collect(out);
}

}  // namespace fetel::nn
