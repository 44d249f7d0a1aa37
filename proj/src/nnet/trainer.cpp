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

#include "stutter/nnet/trainer.hpp"

#include <algorithm>
#include <numeric>

#include "stutter/error.hpp"
#include "stutter/eval.hpp"

namespace stutter::nnet {

std::vector<int> Dataset::labels() const {
  std::vector<int> out;
  out.reserve(examples.size());
  for (const auto& e : examples) out.push_back(e.label);
  return out;
}

Batch MakeBatch(const Dataset& data, std::span<const std::size_t> indices) {
  Batch batch;
  const std::size_t dim = data.dim;
  if (data.sequence) {
    std::size_t max_frames = 0;
    std::vector<std::size_t> lengths;
    for (std::size_t i : indices) {
      lengths.push_back(data.examples[i].frames);
      max_frames = std::max(max_frames, data.examples[i].frames);
    }
    batch.inputs = Tensor::Sequence(indices.size(), max_frames, dim, std::move(lengths));
    for (std::size_t b = 0; b < indices.size(); ++b) {
      const auto& ex = data.examples[indices[b]];
      std::copy(ex.values.begin(), ex.values.end(),
                batch.inputs.values.begin() + static_cast<std::ptrdiff_t>(b * max_frames * dim));
    }
  } else {
    batch.inputs = Tensor::Matrix(indices.size(), dim);
    for (std::size_t b = 0; b < indices.size(); ++b) {
      const auto& ex = data.examples[indices[b]];
      std::copy(ex.values.begin(), ex.values.end(),
                batch.inputs.values.begin() + static_cast<std::ptrdiff_t>(b * dim));
    }
  }
  for (std::size_t i : indices) batch.labels.push_back(data.examples[i].label);
  return batch;
}

std::vector<std::vector<std::size_t>> PlanBatches(const Dataset& data, std::size_t batch_size,
                                                  std::mt19937_64* rng) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  if (rng) std::shuffle(order.begin(), order.end(), *rng);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return data.examples[a].frames < data.examples[b].frames;
  });
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  if (rng) std::shuffle(batches.begin(), batches.end(), *rng);
  return batches;
}

void TrainConfig::Validate() const {
  if (batch_size == 0) throw Error(ErrorCode::kBadConfig, "batch_size must be >= 1");
  if (patience == 0) throw Error(ErrorCode::kBadConfig, "patience must be >= 1");
  if (max_epochs == 0) throw Error(ErrorCode::kBadConfig, "max_epochs must be >= 1");
  if (!(adam.lr > 0)) throw Error(ErrorCode::kBadConfig, "learning rate must be > 0");
}

double EvaluateLoss(Trainable& model, const Dataset& data, std::size_t batch_size) {
  const auto batches = PlanBatches(data, batch_size, nullptr);
  double total = 0.0;
  for (const auto& idx : batches) total += model.EvalLoss(MakeBatch(data, idx));
  return total / static_cast<double>(batches.size());
}

std::vector<int> PredictAll(Trainable& model, const Dataset& data, std::size_t batch_size) {
  std::vector<int> out(data.size());
  for (const auto& idx : PlanBatches(data, batch_size, nullptr)) {
    const auto pred = model.Predict(MakeBatch(data, idx).inputs);
    for (std::size_t i = 0; i < idx.size(); ++i) out[idx[i]] = pred[i];
  }
  return out;
}

namespace {

struct Snapshot {
  std::vector<std::vector<double>> params;
  std::vector<std::vector<double>> buffers;

  void Capture(Trainable& model) {
    params.clear();
    buffers.clear();
    for (const Param* p : model.Params()) params.push_back(p->value);
    for (const Buffer* b : model.Buffers()) buffers.push_back(b->value);
  }
  void Restore(Trainable& model) const {
    auto ps = model.Params();
    auto bs = model.Buffers();
    for (std::size_t i = 0; i < ps.size(); ++i) ps[i]->value = params[i];
    for (std::size_t i = 0; i < bs.size(); ++i) bs[i]->value = buffers[i];
  }
};

}  // namespace

TrainHistory Train(Trainable& model, const Dataset& train, const Dataset& val,
                   const TrainConfig& config) {
  config.Validate();
  if (train.empty()) throw Error(ErrorCode::kEmptySplit, "train");
  if (val.empty()) throw Error(ErrorCode::kEmptySplit, "validation");

  std::mt19937_64 rng(config.seed);
  Adam adam(config.adam);
  EarlyStopping stopper(config.patience);
  Snapshot best;
  best.Capture(model);
  const auto val_labels = val.labels();

  TrainHistory history;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    double train_total = 0.0;
    const auto batches = PlanBatches(train, config.batch_size, &rng);
    for (const auto& idx : batches) {
      train_total += model.TrainStep(MakeBatch(train, idx));
      adam.Step(model.Params());
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = train_total / static_cast<double>(batches.size());
    rec.val_loss = EvaluateLoss(model, val, config.batch_size);
    const auto pred = PredictAll(model, val, config.batch_size);
    rec.val_uar = eval::ComputeMetrics(eval::Confusion(val_labels, pred)).uar;
    history.epochs.push_back(rec);

    const bool stop = stopper.Update(rec.val_loss);
    if (stopper.improved()) best.Capture(model);
    if (stop) {
      history.early_stopped = true;
      break;
    }
  }
  history.best_epoch = stopper.best_epoch();
  best.Restore(model);
  return history;
}

}  // namespace stutter::nnet
