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
#include <string>
#include <vector>

namespace stutter::nnet {

// Dense activations in 64-bit precision. Rank 2 is [rows][features]; rank 3
// is a padded batch of sequences [batch][frames][channels] where `lengths`
// holds the number of valid frames per sample and padded frames are zero.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> values;
  std::vector<std::size_t> lengths;

  static Tensor Matrix(std::size_t rows, std::size_t cols);
  static Tensor Sequence(std::size_t batch, std::size_t frames, std::size_t channels,
                         std::vector<std::size_t> lengths);

  std::size_t rank() const { return shape.size(); }
  std::size_t size() const { return values.size(); }
  std::size_t batch() const { return shape.empty() ? 0 : shape[0]; }
  // Trailing (feature/channel) dimension.
  std::size_t features() const { return shape.empty() ? 0 : shape.back(); }
  std::size_t frames() const { return rank() == 3 ? shape[1] : 1; }

  double& operator()(std::size_t r, std::size_t c) { return values[r * shape[1] + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values[r * shape[1] + c]; }
  double& operator()(std::size_t b, std::size_t t, std::size_t c) {
    return values[(b * shape[1] + t) * shape[2] + c];
  }
  double operator()(std::size_t b, std::size_t t, std::size_t c) const {
    return values[(b * shape[1] + t) * shape[2] + c];
  }

  // Same shape and lengths, zero values.
  Tensor ZerosLike() const;
};

// A trainable tensor with its accumulated gradient.
struct Param {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> value;
  std::vector<double> grad;

  Param() = default;
  Param(std::string name, std::vector<std::size_t> shape);
  void ZeroGrad();
};

// Non-trainable persistent state (BatchNorm running statistics).
struct Buffer {
  std::string name;
  std::vector<double> value;
};

}  // namespace stutter::nnet
