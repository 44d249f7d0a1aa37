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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstring>
#include <vector>

#include "stutter/kernels.hpp"

namespace stutter::kernels::parallel {
namespace {

using Index = std::ptrdiff_t;

// [out][in][taps] -> [out][taps][in] so the inner loop runs over contiguous
// input channels.
std::vector<double> TapMajor(const TdnnShape& s, const double* w) {
  const std::size_t taps = s.taps.size();
  std::vector<double> wt(s.out * taps * s.in);
  for (std::size_t o = 0; o < s.out; ++o)
    for (std::size_t i = 0; i < s.in; ++i)
      for (std::size_t k = 0; k < taps; ++k)
        wt[(o * taps + k) * s.in + i] = w[(o * s.in + i) * taps + k];
  return wt;
}

}  // namespace

void TdnnForward(const TdnnShape& s, const double* x, const double* w,
                 const double* bias, std::span<const std::size_t> valid_out,
                 double* y) {
  const std::size_t taps = s.taps.size();
  const Index out_frames = static_cast<Index>(s.out_frames());
  const Index batch = static_cast<Index>(s.batch);
  const std::vector<double> wt = TapMajor(s, w);

#pragma omp parallel for collapse(2) schedule(static)
  for (Index b = 0; b < batch; ++b) {
    for (Index t = 0; t < out_frames; ++t) {
      double* yrow = y + (b * out_frames + t) * static_cast<Index>(s.out);
      if (static_cast<std::size_t>(t) >= valid_out[b]) {
        std::memset(yrow, 0, sizeof(double) * s.out);
        continue;
      }
      for (std::size_t o = 0; o < s.out; ++o) {
        double acc = bias[o];
        for (std::size_t k = 0; k < taps; ++k) {
          const double* xf = x + (b * static_cast<Index>(s.frames) + t +
                                  static_cast<Index>(s.taps[k])) *
                                     static_cast<Index>(s.in);
          const double* wk = wt.data() + (o * taps + k) * s.in;
          for (std::size_t i = 0; i < s.in; ++i) acc += wk[i] * xf[i];
        }
        yrow[o] = acc;
      }
    }
  }
}

void TdnnBackward(const TdnnShape& s, const double* x, const double* w,
                  const double* grad_y, double* grad_x, double* grad_w,
                  double* grad_b) {
  const std::size_t taps = s.taps.size();
  const std::size_t out_frames = s.out_frames();
  const Index out = static_cast<Index>(s.out);
  const Index batch = static_cast<Index>(s.batch);

  // Parameter gradients: one output channel per iteration.
#pragma omp parallel for schedule(static)
  for (Index o = 0; o < out; ++o) {
    for (std::size_t b = 0; b < s.batch; ++b) {
      for (std::size_t t = 0; t < out_frames; ++t) {
        const double g = grad_y[(b * out_frames + t) * s.out + o];
        grad_b[o] += g;
        for (std::size_t k = 0; k < taps; ++k) {
          const double* xf = x + (b * s.frames + t + s.taps[k]) * s.in;
          for (std::size_t i = 0; i < s.in; ++i) {
            grad_w[(o * s.in + i) * taps + k] += g * xf[i];
          }
        }
      }
    }
  }

  // Input gradients: one sample per iteration.
  const std::vector<double> wt = TapMajor(s, w);
#pragma omp parallel for schedule(static)
  for (Index b = 0; b < batch; ++b) {
    double* gx = grad_x + b * static_cast<Index>(s.frames * s.in);
    std::memset(gx, 0, sizeof(double) * s.frames * s.in);
    for (std::size_t t = 0; t < out_frames; ++t) {
      for (std::size_t o = 0; o < s.out; ++o) {
        const double g = grad_y[(b * out_frames + t) * s.out + o];
        for (std::size_t k = 0; k < taps; ++k) {
          double* gf = gx + (t + s.taps[k]) * s.in;
          const double* wk = wt.data() + (o * taps + k) * s.in;
          for (std::size_t i = 0; i < s.in; ++i) gf[i] += g * wk[i];
        }
      }
    }
  }
}

void LinearForward(std::size_t rows, std::size_t in, std::size_t out,
                   const double* x, const double* w, const double* bias,
                   double* y) {
  const Index n_rows = static_cast<Index>(rows);
#pragma omp parallel for schedule(static)
  for (Index n = 0; n < n_rows; ++n) {
    const double* xr = x + n * static_cast<Index>(in);
    for (std::size_t o = 0; o < out; ++o) {
      const double* wr = w + o * in;
      double acc = bias[o];
      for (std::size_t i = 0; i < in; ++i) acc += xr[i] * wr[i];
      y[n * static_cast<Index>(out) + static_cast<Index>(o)] = acc;
    }
  }
}

void LinearBackward(std::size_t rows, std::size_t in, std::size_t out,
                    const double* x, const double* w, const double* grad_y,
                    double* grad_x, double* grad_w, double* grad_b) {
  const Index n_out = static_cast<Index>(out);
  const Index n_rows = static_cast<Index>(rows);

#pragma omp parallel for schedule(static)
  for (Index o = 0; o < n_out; ++o) {
    double* gw = grad_w + o * static_cast<Index>(in);
    for (std::size_t n = 0; n < rows; ++n) {
      const double g = grad_y[n * out + o];
      grad_b[o] += g;
      const double* xr = x + n * in;
      for (std::size_t i = 0; i < in; ++i) gw[i] += g * xr[i];
    }
  }

#pragma omp parallel for schedule(static)
  for (Index n = 0; n < n_rows; ++n) {
    double* gx = grad_x + n * static_cast<Index>(in);
    std::memset(gx, 0, sizeof(double) * in);
    for (std::size_t o = 0; o < out; ++o) {
      const double g = grad_y[n * static_cast<Index>(out) + static_cast<Index>(o)];
      const double* wr = w + o * in;
      for (std::size_t i = 0; i < in; ++i) gx[i] += g * wr[i];
    }
  }
}

void StatPool(std::size_t batch, std::size_t frames, std::size_t dim,
              std::span<const std::size_t> lengths, const double* x, double eps,
              double* out) {
  const Index n_batch = static_cast<Index>(batch);
#pragma omp parallel for schedule(static)
  for (Index b = 0; b < n_batch; ++b) {
    const std::size_t len = lengths[b];
    const double n = static_cast<double>(len);
    const double* xb = x + b * static_cast<Index>(frames * dim);
    double* mean = out + b * static_cast<Index>(2 * dim);
    double* sd = mean + dim;
    std::fill(mean, mean + dim, 0.0);
    std::fill(sd, sd + dim, 0.0);
    for (std::size_t t = 0; t < len; ++t)
      for (std::size_t d = 0; d < dim; ++d) mean[d] += xb[t * dim + d];
    for (std::size_t d = 0; d < dim; ++d) mean[d] /= n;
    for (std::size_t t = 0; t < len; ++t) {
      for (std::size_t d = 0; d < dim; ++d) {
        const double c = xb[t * dim + d] - mean[d];
        sd[d] += c * c;
      }
    }
    for (std::size_t d = 0; d < dim; ++d) sd[d] = std::sqrt(sd[d] / n + eps);
  }
}

void SquaredDistances(std::size_t n_queries, std::size_t n_refs, std::size_t dim,
                      const double* queries, const double* refs, double* out) {
  const Index nq = static_cast<Index>(n_queries);
#pragma omp parallel for schedule(static)
  for (Index q = 0; q < nq; ++q) {
    const double* a = queries + q * static_cast<Index>(dim);
    for (std::size_t r = 0; r < n_refs; ++r) {
      const double* b = refs + r * dim;
      double acc = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = a[d] - b[d];
        acc += diff * diff;
      }
      out[q * static_cast<Index>(n_refs) + static_cast<Index>(r)] = acc;
    }
  }
}

}  // namespace stutter::kernels::parallel
