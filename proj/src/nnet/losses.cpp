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

#include "stutter/nnet/losses.hpp"

#include <algorithm>
#include <cmath>

#include "stutter/error.hpp"
#include "stutter/labels.hpp"

namespace stutter::nnet {
namespace {

void CheckLogits(const Tensor& logits, std::span<const int> labels) {
  if (logits.rank() != 2) throw Error(ErrorCode::kBadShape, "logits must be rank 2");
  if (logits.batch() != labels.size()) {
    throw Error(ErrorCode::kLengthMismatch, "logits rows != labels");
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= logits.features()) {
      throw Error(ErrorCode::kBadShape, "label " + std::to_string(y) + " out of range");
    }
  }
}

// Per-row -log p[label]; fills probs.
std::vector<double> RowNll(const Tensor& logits, std::span<const int> labels, Tensor& probs) {
  const std::size_t classes = logits.features();
  probs = Tensor::Matrix(logits.batch(), classes);
  std::vector<double> nll(logits.batch());
  for (std::size_t r = 0; r < logits.batch(); ++r) {
    double mx = logits(r, 0);
    for (std::size_t c = 1; c < classes; ++c) mx = std::max(mx, logits(r, c));
    double z = 0.0;
    for (std::size_t c = 0; c < classes; ++c) z += std::exp(logits(r, c) - mx);
    const double log_z = std::log(z);
    for (std::size_t c = 0; c < classes; ++c) probs(r, c) = std::exp(logits(r, c) - mx - log_z);
    nll[r] = -(logits(r, static_cast<std::size_t>(labels[r])) - mx - log_z);
  }
  return nll;
}

Tensor SelectRows(const Tensor& x, const std::vector<std::size_t>& rows) {
  Tensor out = Tensor::Matrix(rows.size(), x.features());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < x.features(); ++c) out(i, c) = x(rows[i], c);
  return out;
}

LossResult BranchLoss(const Tensor& logits, std::span<const int> labels,
                      const std::optional<std::vector<double>>& alpha) {
  if (alpha) return WeightedCrossEntropy(logits, labels, *alpha);
  return CrossEntropy(logits, labels);
}

}  // namespace

Tensor Softmax(const Tensor& logits) {
  Tensor probs;
  std::vector<int> dummy(logits.batch(), 0);
  RowNll(logits, dummy, probs);
  return probs;
}

LossResult CrossEntropy(const Tensor& logits, std::span<const int> labels) {
  CheckLogits(logits, labels);
  LossResult out;
  if (labels.empty()) {
    out.grad = logits.ZerosLike();
    return out;
  }
  Tensor probs;
  const auto nll = RowNll(logits, labels, probs);
  const double n = static_cast<double>(labels.size());
  double total = 0.0;
  for (double v : nll) total += v;
  out.value = total / n;
  out.grad = std::move(probs);
  for (std::size_t r = 0; r < labels.size(); ++r) {
    out.grad(r, static_cast<std::size_t>(labels[r])) -= 1.0;
    for (std::size_t c = 0; c < logits.features(); ++c) out.grad(r, c) /= n;
  }
  return out;
}

LossResult WeightedCrossEntropy(const Tensor& logits, std::span<const int> labels,
                                std::span<const double> alpha) {
  CheckLogits(logits, labels);
  if (alpha.size() != logits.features()) {
    throw Error(ErrorCode::kLengthMismatch, "alpha size != classes");
  }
  for (double a : alpha) {
    if (!(a > 0.0)) throw Error(ErrorCode::kNonPositiveWeight, std::to_string(a));
  }
  LossResult out;
  if (labels.empty()) {
    out.grad = logits.ZerosLike();
    return out;
  }
  Tensor probs;
  const auto nll = RowNll(logits, labels, probs);
  double weight_sum = 0.0, total = 0.0;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    const double a = alpha[static_cast<std::size_t>(labels[r])];
    weight_sum += a;
    total += a * nll[r];
  }
  out.value = total / weight_sum;
  out.grad = std::move(probs);
  for (std::size_t r = 0; r < labels.size(); ++r) {
    const double scale = alpha[static_cast<std::size_t>(labels[r])] / weight_sum;
    out.grad(r, static_cast<std::size_t>(labels[r])) -= 1.0;
    for (std::size_t c = 0; c < logits.features(); ++c) out.grad(r, c) *= scale;
  }
  return out;
}

int FluentTarget(int label) { return IsFluent(label) ? kFluentIndex : kDisfluentIndex; }

JointLossResult JointLoss(const Tensor& fluent_logits, const Tensor& disfluent_logits,
                          std::span<const int> labels, const JointLossOptions& options) {
  if (fluent_logits.features() != 2) {
    throw Error(ErrorCode::kBadShape, "fluent head must have 2 logits");
  }
  const bool masked = options.target == DisfluentTarget::kMasked;
  const std::size_t want = masked ? kNumDisfluentClasses : kNumClasses;
  if (disfluent_logits.features() != want) {
    throw Error(ErrorCode::kBadShape, "disfluent head must have " + std::to_string(want) +
                                          " logits");
  }
  if (disfluent_logits.batch() != labels.size()) {
    throw Error(ErrorCode::kLengthMismatch, "disfluent logits rows != labels");
  }

  std::vector<int> fluent_targets(labels.size());
  std::transform(labels.begin(), labels.end(), fluent_targets.begin(), FluentTarget);
  LossResult lf = BranchLoss(fluent_logits, fluent_targets, options.fluent_alpha);

  JointLossResult out;
  out.fluent = lf.value;
  out.fluent_grad = std::move(lf.grad);

  if (masked) {
    std::vector<std::size_t> rows;
    std::vector<int> targets;
    for (std::size_t r = 0; r < labels.size(); ++r) {
      if (!IsFluent(labels[r])) {
        rows.push_back(r);
        targets.push_back(labels[r]);
      }
    }
    out.disfluent_grad = disfluent_logits.ZerosLike();
    if (!rows.empty()) {
      LossResult ld = BranchLoss(SelectRows(disfluent_logits, rows), targets,
                                 options.disfluent_alpha);
      out.disfluent = ld.value;
      for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t c = 0; c < want; ++c) out.disfluent_grad(rows[i], c) = ld.grad(i, c);
    }
  } else {
    LossResult ld = BranchLoss(disfluent_logits, labels, options.disfluent_alpha);
    out.disfluent = ld.value;
    out.disfluent_grad = std::move(ld.grad);
  }
  out.value = out.fluent + out.disfluent;
  return out;
}

double CosineSimilarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kLengthMismatch, "cosine dims differ");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::kZeroNorm, "cosine similarity");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double ContrastiveLoss(std::span<const double> context, std::span<const double> target,
                       const std::vector<std::vector<double>>& distractors, double tau) {
  if (!(tau > 0.0)) throw Error(ErrorCode::kBadConfig, "temperature must be > 0");
  std::vector<double> scores;
  scores.reserve(distractors.size() + 1);
  scores.push_back(CosineSimilarity(context, target) / tau);
  for (const auto& d : distractors) scores.push_back(CosineSimilarity(context, d) / tau);
  const double mx = *std::max_element(scores.begin(), scores.end());
  double z = 0.0;
  for (double s : scores) z += std::exp(s - mx);
  return -(scores[0] - mx - std::log(z));
}

}  // namespace stutter::nnet
