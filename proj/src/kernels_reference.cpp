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

#include <cmath>
#include <cstring>

#include "stutter/kernels.hpp"

namespace stutter::kernels::reference {

void TdnnForward(const TdnnShape& s, const double* x, const double* w,
                 const double* bias, std::span<const std::size_t> valid_out,
                 double* y) {
  const std::size_t taps = s.taps.size();
  const std::size_t out_frames = s.out_frames();
  for (std::size_t b = 0; b < s.batch; ++b) {
    for (std::size_t t = 0; t < out_frames; ++t) {
      for (std::size_t o = 0; o < s.out; ++o) {
        double acc = 0.0;
        if (t < valid_out[b]) {
          acc = bias[o];
          for (std::size_t k = 0; k < taps; ++k) {
            for (std::size_t i = 0; i < s.in; ++i) {
              acc += w[(o * s.in + i) * taps + k] *
                     x[(b * s.frames + t + s.taps[k]) * s.in + i];
            }
          }
        }
        y[(b * out_frames + t) * s.out + o] = acc;
      }
    }
  }
}

void TdnnBackward(const TdnnShape& s, const double* x, const double* w,
                  const double* grad_y, double* grad_x, double* grad_w,
                  double* grad_b) {
  const std::size_t taps = s.taps.size();
  const std::size_t out_frames = s.out_frames();
  std::memset(grad_x, 0, sizeof(double) * s.batch * s.frames * s.in);
  for (std::size_t b = 0; b < s.batch; ++b) {
    for (std::size_t t = 0; t < out_frames; ++t) {
      for (std::size_t o = 0; o < s.out; ++o) {
        const double g = grad_y[(b * out_frames + t) * s.out + o];
        grad_b[o] += g;
        for (std::size_t k = 0; k < taps; ++k) {
          const std::size_t f = t + s.taps[k];
          for (std::size_t i = 0; i < s.in; ++i) {
            grad_w[(o * s.in + i) * taps + k] += g * x[(b * s.frames + f) * s.in + i];
            grad_x[(b * s.frames + f) * s.in + i] += g * w[(o * s.in + i) * taps + k];
          }
        }
      }
    }
  }
}

void LinearForward(std::size_t rows, std::size_t in, std::size_t out,
                   const double* x, const double* w, const double* bias,
                   double* y) {
  for (std::size_t n = 0; n < rows; ++n) {
    for (std::size_t o = 0; o < out; ++o) {
      double acc = bias[o];
      for (std::size_t i = 0; i < in; ++i) acc += x[n * in + i] * w[o * in + i];
      y[n * out + o] = acc;
    }
  }
}

void LinearBackward(std::size_t rows, std::size_t in, std::size_t out,
                    const double* x, const double* w, const double* grad_y,
                    double* grad_x, double* grad_w, double* grad_b) {
  std::memset(grad_x, 0, sizeof(double) * rows * in);
  for (std::size_t n = 0; n < rows; ++n) {
    for (std::size_t o = 0; o < out; ++o) {
      const double g = grad_y[n * out + o];
      grad_b[o] += g;
      for (std::size_t i = 0; i < in; ++i) {
        grad_w[o * in + i] += g * x[n * in + i];
        grad_x[n * in + i] += g * w[o * in + i];
      }
    }
  }
}

void StatPool(std::size_t batch, std::size_t frames, std::size_t dim,
              std::span<const std::size_t> lengths, const double* x, double eps,
              double* out) {
  for (std::size_t b = 0; b < batch; ++b) {
    const double n = static_cast<double>(lengths[b]);
    for (std::size_t d = 0; d < dim; ++d) {
      double sum = 0.0;
      for (std::size_t t = 0; t < lengths[b]; ++t) sum += x[(b * frames + t) * dim + d];
      const double mean = sum / n;
      double sq = 0.0;
      for (std::size_t t = 0; t < lengths[b]; ++t) {
        const double c = x[(b * frames + t) * dim + d] - mean;
        sq += c * c;
      }
      out[b * 2 * dim + d] = mean;
      out[b * 2 * dim + dim + d] = std::sqrt(sq / n + eps);
    }
  }
}

void SquaredDistances(std::size_t n_queries, std::size_t n_refs, std::size_t dim,
                      const double* queries, const double* refs, double* out) {
  for (std::size_t q = 0; q < n_queries; ++q) {
    for (std::size_t r = 0; r < n_refs; ++r) {
      double acc = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = queries[q * dim + d] - refs[r * dim + d];
        acc += diff * diff;
      }
      out[q * n_refs + r] = acc;
    }
  }
}

}  // namespace stutter::kernels::reference
