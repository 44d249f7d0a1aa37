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

#include "stutter/nnet/tensor.hpp"

#include <algorithm>

namespace stutter::nnet {

Tensor Tensor::Matrix(std::size_t rows, std::size_t cols) {
  Tensor t;
  t.shape = {rows, cols};
  t.values.assign(rows * cols, 0.0);
  return t;
}

Tensor Tensor::Sequence(std::size_t batch, std::size_t frames, std::size_t channels,
                        std::vector<std::size_t> lengths) {
  Tensor t;
  t.shape = {batch, frames, channels};
  t.values.assign(batch * frames * channels, 0.0);
  t.lengths = std::move(lengths);
  return t;
}

Tensor Tensor::ZerosLike() const {
  Tensor t;
  t.shape = shape;
  t.values.assign(values.size(), 0.0);
  t.lengths = lengths;
  return t;
}

Param::Param(std::string name_in, std::vector<std::size_t> shape_in)
    : name(std::move(name_in)), shape(std::move(shape_in)) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  value.assign(n, 0.0);
  grad.assign(n, 0.0);
}

void Param::ZeroGrad() { std::fill(grad.begin(), grad.end(), 0.0); }

}  // namespace stutter::nnet
