// Copyright 2026 The stutterdet Authors
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

#include "stutter/nnet/layers.hpp"

#include <cmath>

#include "stutter/error.hpp"
#include "stutter/kernels.hpp"

namespace stutter::nnet {
namespace {

void RequireRank(const Tensor& x, std::size_t rank, const std::string& who) {
  if (x.rank() != rank) {
    throw Error(ErrorCode::kBadShape, who + " expects rank " + std::to_string(rank) +
                                          ", got " + std::to_string(x.rank()));
  }
}

void RequireFeatures(const Tensor& x, std::size_t n, const std::string& who) {
  if (x.features() != n) {
    throw Error(ErrorCode::kBadShape, who + " expects " + std::to_string(n) +
                                          " features, got " + std::to_string(x.features()));
  }
}

// PyTorch-style fan-in uniform init for weights and biases.
void FanInUniform(Param& p, std::size_t fan_in, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : p.value) v = dist(rng);
}

// Visits every valid (row, feature-block) position: rows of a matrix, or
// valid frames of a padded sequence batch.
template <typename Fn>
void ForEachValidRow(const Tensor& x, Fn&& fn) {
  if (x.rank() == 2) {
    for (std::size_t r = 0; r < x.shape[0]; ++r) fn(r * x.shape[1]);
  } else {
    const std::size_t frames = x.shape[1], c = x.shape[2];
    for (std::size_t b = 0; b < x.shape[0]; ++b)
      for (std::size_t t = 0; t < x.lengths[b]; ++t) fn((b * frames + t) * c);
  }
}

}  // namespace

// ------------------------------------------------------------------ Tdnn --

Tdnn::Tdnn(std::string name, std::size_t in, std::size_t out, std::vector<int> offsets,
           std::mt19937_64& rng)
    : Layer(std::move(name)), in_(in), out_(out), offsets_(std::move(offsets)) {
  if (offsets_.empty()) throw Error(ErrorCode::kBadConfig, "TDNN needs offsets");
  for (std::size_t k = 1; k < offsets_.size(); ++k) {
    if (offsets_[k] <= offsets_[k - 1]) {
      throw Error(ErrorCode::kBadConfig, "TDNN offsets must be strictly increasing");
    }
  }
  for (int o : offsets_) taps_.push_back(static_cast<std::size_t>(o - offsets_.front()));
  span_ = taps_.back();
  weight_ = Param(this->name() + ".weight", {out_, in_, taps_.size()});
  bias_ = Param(this->name() + ".bias", {out_});
  FanInUniform(weight_, in_ * taps_.size(), rng);
  FanInUniform(bias_, in_ * taps_.size(), rng);
}

Tensor Tdnn::Forward(const Tensor& x, Mode) {
  RequireRank(x, 3, name());
  RequireFeatures(x, in_, name());
  std::vector<std::size_t> valid(x.batch());
  for (std::size_t b = 0; b < x.batch(); ++b) {
    if (x.lengths[b] <= span_) {
      throw Error(ErrorCode::kContextTooShort,
                  name() + " needs " + std::to_string(span_ + 1) + " frames, sample " +
                      std::to_string(b) + " has " + std::to_string(x.lengths[b]));
    }
    valid[b] = x.lengths[b] - span_;
  }
  input_ = x;
  kernels::TdnnShape s{x.batch(), x.frames(), in_, out_, taps_, span_};
  Tensor y = Tensor::Sequence(x.batch(), s.out_frames(), out_, valid);
  kernels::parallel::TdnnForward(s, x.values.data(), weight_.value.data(),
                                 bias_.value.data(), valid, y.values.data());
  return y;
}

Tensor Tdnn::Backward(const Tensor& grad_y) {
  kernels::TdnnShape s{input_.batch(), input_.frames(), in_, out_, taps_, span_};
  Tensor gx = input_.ZerosLike();
  kernels::parallel::TdnnBackward(s, input_.values.data(), weight_.value.data(),
                                  grad_y.values.data(), gx.values.data(),
                                  weight_.grad.data(), bias_.grad.data());
  return gx;
}

// ---------------------------------------------------------------- Linear --

Linear::Linear(std::string name, std::size_t in, std::size_t out, std::mt19937_64& rng)
    : Layer(std::move(name)), in_(in), out_(out) {
  weight_ = Param(this->name() + ".weight", {out_, in_});
  bias_ = Param(this->name() + ".bias", {out_});
  FanInUniform(weight_, in_, rng);
  FanInUniform(bias_, in_, rng);
}

Tensor Linear::Forward(const Tensor& x, Mode) {
  RequireRank(x, 2, name());
  RequireFeatures(x, in_, name());
  input_ = x;
  Tensor y = Tensor::Matrix(x.batch(), out_);
  kernels::parallel::LinearForward(x.batch(), in_, out_, x.values.data(),
                                   weight_.value.data(), bias_.value.data(),
                                   y.values.data());
  return y;
}

Tensor Linear::Backward(const Tensor& grad_y) {
  Tensor gx = input_.ZerosLike();
  kernels::parallel::LinearBackward(input_.batch(), in_, out_, input_.values.data(),
                                    weight_.value.data(), grad_y.values.data(),
                                    gx.values.data(), weight_.grad.data(),
                                    bias_.grad.data());
  return gx;
}

// ------------------------------------------------------------------ Relu --

Tensor Relu::Forward(const Tensor& x, Mode) {
  output_ = x;
  for (auto& v : output_.values) v = v > 0.0 ? v : 0.0;
  return output_;
}

Tensor Relu::Backward(const Tensor& grad_y) {
  Tensor gx = grad_y;
  for (std::size_t i = 0; i < gx.values.size(); ++i) {
    if (!(output_.values[i] > 0.0)) gx.values[i] = 0.0;
  }
  return gx;
}

// ------------------------------------------------------------- BatchNorm --

BatchNorm::BatchNorm(std::string name, std::size_t features, double momentum, double eps)
    : Layer(std::move(name)), features_(features), momentum_(momentum), eps_(eps) {
  gamma_ = Param(this->name() + ".gamma", {features_});
  beta_ = Param(this->name() + ".beta", {features_});
  std::fill(gamma_.value.begin(), gamma_.value.end(), 1.0);
  running_mean_ = {this->name() + ".running_mean", std::vector<double>(features_, 0.0)};
  running_var_ = {this->name() + ".running_var", std::vector<double>(features_, 1.0)};
}

Tensor BatchNorm::Forward(const Tensor& x, Mode mode) {
  if (x.rank() != 2 && x.rank() != 3) RequireRank(x, 2, name());
  RequireFeatures(x, features_, name());
  const std::size_t c = features_;
  mode_ = mode;

  std::vector<double> mean(c, 0.0), var(c, 0.0);
  std::size_t n = 0;
  if (mode == Mode::kTrain) {
    ForEachValidRow(x, [&](std::size_t off) {
      for (std::size_t f = 0; f < c; ++f) mean[f] += x.values[off + f];
      ++n;
    });
    if (n == 0) throw Error(ErrorCode::kEmptySequence, name() + ": no valid frames");
    for (auto& m : mean) m /= static_cast<double>(n);
    ForEachValidRow(x, [&](std::size_t off) {
      for (std::size_t f = 0; f < c; ++f) {
        const double d = x.values[off + f] - mean[f];
        var[f] += d * d;
      }
    });
    for (auto& v : var) v /= static_cast<double>(n);
    for (std::size_t f = 0; f < c; ++f) {
      running_mean_.value[f] = (1 - momentum_) * running_mean_.value[f] + momentum_ * mean[f];
      const double unbiased = n > 1 ? var[f] * n / (n - 1.0) : var[f];
      running_var_.value[f] = (1 - momentum_) * running_var_.value[f] + momentum_ * unbiased;
    }
  } else {
    mean = running_mean_.value;
    var = running_var_.value;
  }
  count_ = n;

  inv_std_.resize(c);
  for (std::size_t f = 0; f < c; ++f) inv_std_[f] = 1.0 / std::sqrt(var[f] + eps_);

  normalized_ = x.ZerosLike();
  Tensor y = x.ZerosLike();
  ForEachValidRow(x, [&](std::size_t off) {
    for (std::size_t f = 0; f < c; ++f) {
      const double xh = (x.values[off + f] - mean[f]) * inv_std_[f];
      normalized_.values[off + f] = xh;
      y.values[off + f] = gamma_.value[f] * xh + beta_.value[f];
    }
  });
  return y;
}

Tensor BatchNorm::Backward(const Tensor& grad_y) {
  const std::size_t c = features_;
  std::vector<double> sum_dy(c, 0.0), sum_dy_xh(c, 0.0);
  ForEachValidRow(grad_y, [&](std::size_t off) {
    for (std::size_t f = 0; f < c; ++f) {
      sum_dy[f] += grad_y.values[off + f];
      sum_dy_xh[f] += grad_y.values[off + f] * normalized_.values[off + f];
    }
  });
  for (std::size_t f = 0; f < c; ++f) {
    gamma_.grad[f] += sum_dy_xh[f];
    beta_.grad[f] += sum_dy[f];
  }

  Tensor gx = grad_y.ZerosLike();
  if (mode_ == Mode::kTrain) {
    const double n = static_cast<double>(count_);
    ForEachValidRow(grad_y, [&](std::size_t off) {
      for (std::size_t f = 0; f < c; ++f) {
        gx.values[off + f] = gamma_.value[f] * inv_std_[f] / n *
                             (n * grad_y.values[off + f] - sum_dy[f] -
                              normalized_.values[off + f] * sum_dy_xh[f]);
      }
    });
  } else {
    ForEachValidRow(grad_y, [&](std::size_t off) {
      for (std::size_t f = 0; f < c; ++f) {
        gx.values[off + f] = grad_y.values[off + f] * gamma_.value[f] * inv_std_[f];
      }
    });
  }
  return gx;
}

// --------------------------------------------------------------- Dropout --

Dropout::Dropout(std::string name, double rate, std::uint64_t seed)
    : Layer(std::move(name)), rate_(rate), rng_(seed) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw Error(ErrorCode::kBadConfig, "dropout rate must be in [0, 1)");
  }
}

Tensor Dropout::Forward(const Tensor& x, Mode mode) {
  mask_.assign(x.values.size(), 1.0);
  if (mode == Mode::kEval || rate_ == 0.0) return x;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double keep = 1.0 / (1.0 - rate_);
  Tensor y = x;
  for (std::size_t i = 0; i < y.values.size(); ++i) {
    mask_[i] = u(rng_) >= rate_ ? keep : 0.0;
    y.values[i] *= mask_[i];
  }
  return y;
}

Tensor Dropout::Backward(const Tensor& grad_y) {
  Tensor gx = grad_y;
  for (std::size_t i = 0; i < gx.values.size(); ++i) gx.values[i] *= mask_[i];
  return gx;
}

// -------------------------------------------------------------- StatPool --

Tensor StatPool::Forward(const Tensor& x, Mode) {
  RequireRank(x, 3, name());
  for (std::size_t b = 0; b < x.batch(); ++b) {
    if (x.lengths[b] == 0) throw Error(ErrorCode::kEmptySequence, name());
  }
  input_ = x;
  const std::size_t c = x.features();
  output_ = Tensor::Matrix(x.batch(), 2 * c);
  kernels::parallel::StatPool(x.batch(), x.frames(), c, x.lengths, x.values.data(), eps_,
                              output_.values.data());
  return output_;
}

Tensor StatPool::Backward(const Tensor& grad_y) {
  const std::size_t c = input_.features();
  Tensor gx = input_.ZerosLike();
  for (std::size_t b = 0; b < input_.batch(); ++b) {
    const double n = static_cast<double>(input_.lengths[b]);
    for (std::size_t t = 0; t < input_.lengths[b]; ++t) {
      for (std::size_t f = 0; f < c; ++f) {
        const double mean = output_(b, f);
        const double sd = output_(b, c + f);
        gx(b, t, f) = grad_y(b, f) / n + grad_y(b, c + f) * (input_(b, t, f) - mean) / (n * sd);
      }
    }
  }
  return gx;
}

// ------------------------------------------------------------ Sequential --

Tensor Sequential::Forward(const Tensor& x, Mode mode) {
  Tensor h = x;
  for (auto& layer : layers_) h = layer->Forward(h, mode);
  return h;
}

Tensor Sequential::Backward(const Tensor& grad_y) {
  Tensor g = grad_y;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->Backward(g);
  return g;
}

std::vector<Param*> Sequential::Params() {
  std::vector<Param*> out;
  for (auto& layer : layers_)
    for (Param* p : layer->Params()) out.push_back(p);
  return out;
}

std::vector<Buffer*> Sequential::Buffers() {
  std::vector<Buffer*> out;
  for (auto& layer : layers_)
    for (Buffer* b : layer->Buffers()) out.push_back(b);
  return out;
}

std::size_t Sequential::Context() const {
  std::size_t total = 0;
  for (const auto& layer : layers_) total += layer->Context();
  return total;
}

}  // namespace stutter::nnet
