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

#include "stutter/nnet/optim.hpp"

#include <cmath>

#include "stutter/error.hpp"

namespace stutter::nnet {

void Adam::Step(const std::vector<Param*>& params) {
  for (const Param* p : params) {
    for (double g : p->grad) {
      if (!std::isfinite(g)) throw Error(ErrorCode::kNonFiniteGradient, p->name);
    }
  }
  if (m_.empty()) {
    for (const Param* p : params) {
      m_.emplace_back(p->value.size(), 0.0);
      v_.emplace_back(p->value.size(), 0.0);
    }
  }
  if (m_.size() != params.size()) {
    throw Error(ErrorCode::kBadShape, "Adam parameter list changed between steps");
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (std::size_t j = 0; j < params.size(); ++j) {
    Param& p = *params[j];
    auto& m = m_[j];
    auto& v = v_[j];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      p.value[i] -= config_.lr * m_hat / (std::sqrt(v_hat) + config_.eps);
    }
  }
}

bool EarlyStopping::Update(double loss) {
  ++epoch_;
  improved_ = loss < best_;
  if (improved_) {
    best_ = loss;
    best_epoch_ = epoch_;
    bad_epochs_ = 0;
  } else {
    ++bad_epochs_;
  }
  return bad_epochs_ >= patience_;
}

}  // namespace stutter::nnet
