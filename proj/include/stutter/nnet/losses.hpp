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

#include <optional>
#include <span>
#include <vector>

#include "stutter/nnet/tensor.hpp"

namespace stutter::nnet {

struct LossResult {
  double value = 0.0;
  Tensor grad;  // d value / d logits
};

// Row-wise softmax of a [rows][classes] tensor, computed via max subtraction.
Tensor Softmax(const Tensor& logits);

// Mean over the batch of -log softmax(logits)[label].
LossResult CrossEntropy(const Tensor& logits, std::span<const int> labels);

// Per-batch normalized weighted cross entropy:
//   sum_i alpha[y_i] * (-log p_i[y_i]) / sum_i alpha[y_i]
// Every entry of alpha must be > 0 (Error(kNonPositiveWeight)).
LossResult WeightedCrossEntropy(const Tensor& logits, std::span<const int> labels,
                                std::span<const double> alpha);

enum class DisfluentTarget {
  // The disfluent head (7 logits) only sees disfluent samples.
  kMasked,
  // The disfluent head (8 logits) sees every sample; NoDisfluency is a class.
  kAllSamples,
};

struct JointLossOptions {
  DisfluentTarget target = DisfluentTarget::kMasked;
  // When set, the corresponding branch uses weighted cross entropy.
  std::optional<std::vector<double>> fluent_alpha;     // 2 entries
  std::optional<std::vector<double>> disfluent_alpha;  // 7 (or 8) entries
};

struct JointLossResult {
  double value = 0.0;  // fluent + disfluent
  double fluent = 0.0;
  double disfluent = 0.0;
  Tensor fluent_grad;
  Tensor disfluent_grad;
};

// Multi-branch objective on 8-way labels. The fluent head is trained on
// IsFluent(label) (index 0 = fluent) over all samples; the disfluent head on
// the disfluent sub-class. A batch with no disfluent samples contributes a
// zero disfluent term in masked mode.
JointLossResult JointLoss(const Tensor& fluent_logits, const Tensor& disfluent_logits,
                          std::span<const int> labels, const JointLossOptions& options = {});

int FluentTarget(int label);

double CosineSimilarity(std::span<const double> a, std::span<const double> b);

// -log( exp(sim(c, q) / tau) / sum_{x in {q} U distractors} exp(sim(c, x) / tau) )
// Throws Error(kZeroNorm) for any zero vector.
double ContrastiveLoss(std::span<const double> context, std::span<const double> target,
                       const std::vector<std::vector<double>>& distractors, double tau);

}  // namespace stutter::nnet
