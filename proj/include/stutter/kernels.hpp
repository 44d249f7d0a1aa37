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
#include <span>

// Data-parallel inner loops. Every kernel exists twice with the same
// signature: `reference` is a plain serial loop nest kept as the test oracle
// and benchmark baseline; `parallel` splits independent outputs across OpenMP
// threads. Each output element is accumulated in the same order in both, so
// results do not depend on the thread count.
namespace stutter::kernels {

// Time-delay layer over a padded batch. Input is [batch][frames][in],
// weights are [out][in][taps], output is [batch][out_frames][out] with
// out_frames = frames - span. taps[k] is the frame offset of tap k relative
// to the first (leftmost) context frame, so taps[0] == 0.
struct TdnnShape {
  std::size_t batch = 0;
  std::size_t frames = 0;
  std::size_t in = 0;
  std::size_t out = 0;
  std::span<const std::size_t> taps;
  std::size_t span = 0;

  std::size_t out_frames() const { return frames - span; }
};

namespace reference {

// Output frames t >= valid_out[b] are written as zero.
void TdnnForward(const TdnnShape& s, const double* x, const double* w,
                 const double* bias, std::span<const std::size_t> valid_out,
                 double* y);
// Accumulates into grad_w/grad_b; overwrites grad_x. grad_y must be zero
// on invalid frames.
void TdnnBackward(const TdnnShape& s, const double* x, const double* w,
                  const double* grad_y, double* grad_x, double* grad_w,
                  double* grad_b);

// y[n][o] = bias[o] + sum_i x[n][i] * w[o][i]
void LinearForward(std::size_t rows, std::size_t in, std::size_t out,
                   const double* x, const double* w, const double* bias,
                   double* y);
void LinearBackward(std::size_t rows, std::size_t in, std::size_t out,
                    const double* x, const double* w, const double* grad_y,
                    double* grad_x, double* grad_w, double* grad_b);

// Per-sample mean and sqrt(var + eps) over the first lengths[b] frames of
// a [batch][frames][dim] block; out is [batch][2 * dim].
void StatPool(std::size_t batch, std::size_t frames, std::size_t dim,
              std::span<const std::size_t> lengths, const double* x, double eps,
              double* out);

// out[q][n] = ||queries[q] - refs[n]||^2
void SquaredDistances(std::size_t n_queries, std::size_t n_refs, std::size_t dim,
                      const double* queries, const double* refs, double* out);

}  // namespace reference

namespace parallel {

void TdnnForward(const TdnnShape& s, const double* x, const double* w,
                 const double* bias, std::span<const std::size_t> valid_out,
                 double* y);
void TdnnBackward(const TdnnShape& s, const double* x, const double* w,
                  const double* grad_y, double* grad_x, double* grad_w,
                  double* grad_b);
void LinearForward(std::size_t rows, std::size_t in, std::size_t out,
                   const double* x, const double* w, const double* bias,
                   double* y);
void LinearBackward(std::size_t rows, std::size_t in, std::size_t out,
                    const double* x, const double* w, const double* grad_y,
                    double* grad_x, double* grad_w, double* grad_b);
void StatPool(std::size_t batch, std::size_t frames, std::size_t dim,
              std::span<const std::size_t> lengths, const double* x, double eps,
              double* out);
void SquaredDistances(std::size_t n_queries, std::size_t n_refs, std::size_t dim,
                      const double* queries, const double* refs, double* out);

}  // namespace parallel
}  // namespace stutter::kernels
