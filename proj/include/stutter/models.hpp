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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stutter/labels.hpp"
#include "stutter/nnet/checkpoint.hpp"
#include "stutter/nnet/layers.hpp"
#include "stutter/nnet/losses.hpp"
#include "stutter/nnet/trainer.hpp"

namespace stutter::models {

// Five TDNN layers with growing context: {-2..2}, {-2,0,2}, {-3,0,3}, {0}, {0}.
// Every TDNN and hidden FC layer is followed by ReLU then BatchNorm; the
// final FC layer emits logits.
struct StutterNetSpec {
  std::size_t channels = 64;
  std::vector<std::size_t> fc_hidden = {64, 64};

  static StutterNetSpec FullScale() { return {512, {512, 512}}; }
};

const std::vector<std::vector<int>>& StutterNetContexts();
inline constexpr std::size_t kStutterNetReceptiveField = 15;

// Per-branch FC stack for pooled inputs: each hidden FC is followed by ReLU,
// BatchNorm and Dropout.
struct ShallowSpec {
  std::vector<std::size_t> hidden = {64, 64};
  double dropout = 0.3;
};

enum class LossKind { kCrossEntropy, kWeighted };

// A trainable network that can be checkpointed and rebuilt.
class NeuralModel : public nnet::Trainable {
 public:
  virtual std::string kind() const = 0;
  // JSON description sufficient to rebuild the architecture.
  virtual std::string Describe() const = 0;

  nnet::Checkpoint ToCheckpoint(std::uint64_t seed);
  // Copies parameters and buffers by name; shapes must match.
  void LoadState(const nnet::Checkpoint& ckpt);
  std::size_t ParameterCount();
};

class SingleBranchNet : public NeuralModel {
 public:
  SingleBranchNet(StutterNetSpec spec, std::size_t input_dim, std::size_t n_classes,
                  std::uint64_t seed);

  // Weighted loss needs one alpha per class.
  void SetLoss(LossKind kind, std::optional<std::vector<double>> alpha = std::nullopt);

  nnet::Tensor Logits(const nnet::Tensor& x, nnet::Mode mode);

  double TrainStep(const nnet::Batch& batch) override;
  double EvalLoss(const nnet::Batch& batch) override;
  std::vector<int> Predict(const nnet::Tensor& inputs) override;
  std::vector<nnet::Param*> Params() override { return net_.Params(); }
  std::vector<nnet::Buffer*> Buffers() override { return net_.Buffers(); }

  std::string kind() const override { return "sb-stutternet"; }
  std::string Describe() const override;

  nnet::Sequential& net() { return net_; }
  const StutterNetSpec& spec() const { return spec_; }

 private:
  nnet::LossResult Loss(const nnet::Tensor& logits, std::span<const int> labels) const;

  StutterNetSpec spec_;
  std::size_t input_dim_, n_classes_;
  LossKind loss_ = LossKind::kCrossEntropy;
  std::optional<std::vector<double>> alpha_;
  nnet::Sequential net_;
};

// Shared encoder feeding a 2-way fluent branch and a disfluent branch
// (7-way when masked, 8-way when trained on all samples).
class MultiBranchNet : public NeuralModel {
 public:
  struct Outputs {
    nnet::Tensor fluent;
    nnet::Tensor disfluent;
  };

  static MultiBranchNet StutterNet(const StutterNetSpec& spec, std::size_t input_dim,
                                   std::uint64_t seed,
                                   nnet::DisfluentTarget target = nnet::DisfluentTarget::kMasked);
  static MultiBranchNet Shallow(const ShallowSpec& spec, std::size_t input_dim,
                                std::uint64_t seed,
                                nnet::DisfluentTarget target = nnet::DisfluentTarget::kMasked);

  MultiBranchNet(MultiBranchNet&&) = default;
  MultiBranchNet& operator=(MultiBranchNet&&) = default;

  void SetLossOptions(nnet::JointLossOptions options);
  const nnet::JointLossOptions& loss_options() const { return options_; }

  Outputs Forward(const nnet::Tensor& x, nnet::Mode mode);
  // Accumulates parameter gradients for both branches and the encoder.
  void Backward(const nnet::Tensor& fluent_grad, const nnet::Tensor& disfluent_grad);

  double TrainStep(const nnet::Batch& batch) override;
  double EvalLoss(const nnet::Batch& batch) override;
  std::vector<int> Predict(const nnet::Tensor& inputs) override;
  std::vector<nnet::Param*> Params() override;
  std::vector<nnet::Buffer*> Buffers() override;

  std::string kind() const override { return shallow_ ? "shallow-mb" : "mb-stutternet"; }
  std::string Describe() const override;

  nnet::Sequential& encoder() { return encoder_; }
  nnet::Sequential& fluent_branch() { return fluent_; }
  nnet::Sequential& disfluent_branch() { return disfluent_; }
  std::vector<nnet::Param*> EncoderParams() { return encoder_.Params(); }
  std::vector<nnet::Param*> FluentParams() { return fluent_.Params(); }
  std::vector<nnet::Param*> DisfluentParams() { return disfluent_.Params(); }
  nnet::DisfluentTarget target() const { return options_.target; }

 private:
  MultiBranchNet() = default;

  bool shallow_ = false;
  std::size_t input_dim_ = 0;
  StutterNetSpec stutternet_spec_;
  ShallowSpec shallow_spec_;
  nnet::JointLossOptions options_;
  nnet::Sequential encoder_, fluent_, disfluent_;
};

// Branch-combination rule for one sample: if the fluent head's argmax is
// fluent, NoDisfluency; otherwise the argmax over the first seven disfluent
// logits.
Label MbPredictRule(std::span<const double> fluent_logits,
                    std::span<const double> disfluent_logits);

// Rebuilds the architecture from checkpoint meta and loads its state.
std::unique_ptr<NeuralModel> LoadNeuralModel(const nnet::Checkpoint& ckpt);

}  // namespace stutter::models
