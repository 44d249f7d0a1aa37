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

#include <cstddef>
#include <limits>
#include <vector>

#include "stutter/nnet/tensor.hpp"

namespace stutter::nnet {

struct AdamConfig {
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam. Moment state is keyed by position in the parameter
// list, so Step must always receive the same list in the same order.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  // All gradients are checked before any parameter moves; a non-finite
  // gradient aborts the step with Error(kNonFiniteGradient, param name).
  void Step(const std::vector<Param*>& params);

  std::size_t steps() const { return t_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  std::size_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

// Stops after `patience` consecutive epochs without a strict improvement of
// the monitored loss.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

  // Returns true when training should stop after this epoch.
  bool Update(double loss);

  bool improved() const { return improved_; }
  std::size_t best_epoch() const { return best_epoch_; }  // 1-based
  double best_loss() const { return best_; }
  std::size_t epochs_seen() const { return epoch_; }

 private:
  std::size_t patience_;
  std::size_t epoch_ = 0;
  std::size_t best_epoch_ = 0;
  std::size_t bad_epochs_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
  bool improved_ = false;
};

}  // namespace stutter::nnet
