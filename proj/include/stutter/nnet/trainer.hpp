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
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "stutter/nnet/optim.hpp"
#include "stutter/nnet/tensor.hpp"

namespace stutter::nnet {

// One utterance worth of features: frames x dim, frame-major. Pooled
// vectors are single-frame examples.
struct Example {
  std::vector<double> values;
  std::size_t frames = 1;
  int label = 0;
};

struct Dataset {
  std::size_t dim = 0;
  // Sequence datasets batch to rank-3 tensors, others to rank-2.
  bool sequence = true;
  std::vector<Example> examples;

  std::size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }
  std::vector<int> labels() const;
};

struct Batch {
  Tensor inputs;
  std::vector<int> labels;
};

// Pads to the longest member; padded frames are zero and masked via lengths.
Batch MakeBatch(const Dataset& data, std::span<const std::size_t> indices);

// Buckets by frame count: indices are shuffled, stably sorted by length,
// cut into batches, and the batch order is shuffled. Without an rng the
// order is deterministic (sorted, unshuffled).
std::vector<std::vector<std::size_t>> PlanBatches(const Dataset& data, std::size_t batch_size,
                                                  std::mt19937_64* rng);

// The surface the trainer needs from a model.
class Trainable {
 public:
  virtual ~Trainable() = default;

  // Zeroes gradients, runs a train-mode forward pass, backpropagates the
  // loss and returns its value.
  virtual double TrainStep(const Batch& batch) = 0;
  // Eval-mode loss; gradients untouched.
  virtual double EvalLoss(const Batch& batch) = 0;
  // Eval-mode 8-way predictions.
  virtual std::vector<int> Predict(const Tensor& inputs) = 0;

  virtual std::vector<Param*> Params() = 0;
  virtual std::vector<Buffer*> Buffers() = 0;
};

struct TrainConfig {
  AdamConfig adam;
  std::size_t batch_size = 128;
  std::size_t max_epochs = 50;
  std::size_t patience = 7;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_uar = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  bool early_stopped = false;
};

// Mini-batch Adam with per-epoch validation and early stopping on the
// validation loss. On return the model holds the best-validation-loss
// parameters and buffers.
TrainHistory Train(Trainable& model, const Dataset& train, const Dataset& val,
                   const TrainConfig& config);

// Mean of per-batch eval losses over `data`.
double EvaluateLoss(Trainable& model, const Dataset& data, std::size_t batch_size);
std::vector<int> PredictAll(Trainable& model, const Dataset& data, std::size_t batch_size);

}  // namespace stutter::nnet
