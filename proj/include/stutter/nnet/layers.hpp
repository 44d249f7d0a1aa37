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

#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "stutter/nnet/tensor.hpp"

namespace stutter::nnet {

enum class Mode { kTrain, kEval };

// Each layer caches what its backward pass needs during Forward, so
// Backward must follow the Forward call it differentiates. Parameter
// gradients accumulate until Param::ZeroGrad.
class Layer {
 public:
  explicit Layer(std::string name) : name_(std::move(name)) {}
  virtual ~Layer() = default;

  const std::string& name() const { return name_; }
  virtual std::string kind() const = 0;

  virtual Tensor Forward(const Tensor& x, Mode mode) = 0;
  virtual Tensor Backward(const Tensor& grad_y) = 0;

  virtual std::vector<Param*> Params() { return {}; }
  virtual std::vector<Buffer*> Buffers() { return {}; }
  // Frames consumed along the time axis (receptive field minus one).
  virtual std::size_t Context() const { return 0; }

 private:
  std::string name_;
};

// Time-delay layer: y[t] = b + sum_k W[:, :, k] x[t + offsets[k]]. Offsets
// are relative to the centre frame and strictly increasing; dilation is
// expressed by the gaps between them. Weight shape is [out][in][taps].
class Tdnn : public Layer {
 public:
  Tdnn(std::string name, std::size_t in, std::size_t out, std::vector<int> offsets,
       std::mt19937_64& rng);

  std::string kind() const override { return "tdnn"; }
  Tensor Forward(const Tensor& x, Mode mode) override;
  Tensor Backward(const Tensor& grad_y) override;
  std::vector<Param*> Params() override { return {&weight_, &bias_}; }
  std::size_t Context() const override { return span_; }

  const std::vector<int>& offsets() const { return offsets_; }
  std::size_t in() const { return in_; }
  std::size_t out() const { return out_; }

 private:
  std::size_t in_, out_;
  std::vector<int> offsets_;
  std::vector<std::size_t> taps_;
  std::size_t span_;
  Param weight_, bias_;
  Tensor input_;
};

// Fully connected layer on rank-2 input. Weight shape is [out][in].
class Linear : public Layer {
 public:
  Linear(std::string name, std::size_t in, std::size_t out, std::mt19937_64& rng);

  std::string kind() const override { return "linear"; }
  Tensor Forward(const Tensor& x, Mode mode) override;
  Tensor Backward(const Tensor& grad_y) override;
  std::vector<Param*> Params() override { return {&weight_, &bias_}; }

 private:
  std::size_t in_, out_;
  Param weight_, bias_;
  Tensor input_;
};

class Relu : public Layer {
 public:
  explicit Relu(std::string name) : Layer(std::move(name)) {}
  std::string kind() const override { return "relu"; }
  Tensor Forward(const Tensor& x, Mode mode) override;
  Tensor Backward(const Tensor& grad_y) override;

 private:
  Tensor output_;
};

// Per-feature normalization. Rank-2 input normalizes over rows; rank-3 over
// all valid frames of all samples. Train mode uses batch statistics (biased
// variance) and updates running statistics with the unbiased variance; eval
// mode uses the running statistics.
class BatchNorm : public Layer {
 public:
  BatchNorm(std::string name, std::size_t features, double momentum = 0.1,
            double eps = 1e-5);

  std::string kind() const override { return "batchnorm"; }
  Tensor Forward(const Tensor& x, Mode mode) override;
  Tensor Backward(const Tensor& grad_y) override;
  std::vector<Param*> Params() override { return {&gamma_, &beta_}; }
  std::vector<Buffer*> Buffers() override { return {&running_mean_, &running_var_}; }

  double eps() const { return eps_; }

 private:
  std::size_t features_;
  double momentum_, eps_;
  Param gamma_, beta_;
  Buffer running_mean_, running_var_;

  Mode mode_ = Mode::kEval;
  Tensor normalized_;
  std::vector<double> inv_std_;
  std::size_t count_ = 0;
};

// Inverted dropout: active only in train mode, survivors scaled by
// 1 / (1 - rate). The mask stream is seeded per layer.
class Dropout : public Layer {
 public:
  Dropout(std::string name, double rate, std::uint64_t seed);

  std::string kind() const override { return "dropout"; }
  Tensor Forward(const Tensor& x, Mode mode) override;
  Tensor Backward(const Tensor& grad_y) override;

  double rate() const { return rate_; }

 private:
  double rate_;
  std::mt19937_64 rng_;
  std::vector<double> mask_;
};

// [batch][frames][C] -> [batch][2C]: mean and sqrt(var + eps) over the valid
// frames of each sample.
class StatPool : public Layer {
 public:
  explicit StatPool(std::string name, double eps = 1e-10)
      : Layer(std::move(name)), eps_(eps) {}

  std::string kind() const override { return "statpool"; }
  Tensor Forward(const Tensor& x, Mode mode) override;
  Tensor Backward(const Tensor& grad_y) override;

 private:
  double eps_;
  Tensor input_;
  Tensor output_;
};

class Sequential {
 public:
  Sequential() = default;
  Sequential(Sequential&&) = default;
  Sequential& operator=(Sequential&&) = default;

  template <typename L, typename... Args>
  L& Add(Args&&... args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    L& ref = *layer;
    layers_.push_back(std::move(layer));
    return ref;
  }

  Tensor Forward(const Tensor& x, Mode mode);
  Tensor Backward(const Tensor& grad_y);

  std::vector<Param*> Params();
  std::vector<Buffer*> Buffers();
  std::size_t Context() const;

  std::size_t size() const { return layers_.size(); }
  bool empty() const { return layers_.empty(); }
  Layer& operator[](std::size_t i) { return *layers_[i]; }
  const Layer& operator[](std::size_t i) const { return *layers_[i]; }

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

}  // namespace stutter::nnet
