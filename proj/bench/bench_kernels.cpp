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

// Serial reference vs OpenMP kernels at full-size widths.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "stutter/kernels.hpp"

namespace {

namespace k = stutter::kernels;

std::vector<double> Random(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

struct TdnnCase {
  static constexpr std::size_t kBatch = 16, kFrames = 150, kIn = 20, kOut = 512;
  std::vector<std::size_t> taps = {0, 1, 2, 3, 4};
  std::vector<std::size_t> valid;
  std::vector<double> x, w, b, y;
  k::TdnnShape shape;

  explicit TdnnCase(std::size_t in) {
    shape = {kBatch, kFrames, in, kOut, taps, 4};
    valid.assign(kBatch, shape.out_frames());
    x = Random(kBatch * kFrames * in, 1);
    w = Random(kOut * in * taps.size(), 2);
    b = Random(kOut, 3);
    y.resize(kBatch * shape.out_frames() * kOut);
  }
};

template <auto Fn>
void BM_TdnnForward(benchmark::State& state) {
  TdnnCase c(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    Fn(c.shape, c.x.data(), c.w.data(), c.b.data(), c.valid, c.y.data());
    benchmark::DoNotOptimize(c.y.data());
  }
}

template <auto Fn>
void BM_LinearForward(benchmark::State& state) {
  const std::size_t rows = 128, in = static_cast<std::size_t>(state.range(0)), out = 512;
  const auto x = Random(rows * in, 4), w = Random(out * in, 5), b = Random(out, 6);
  std::vector<double> y(rows * out);
  for (auto _ : state) {
    Fn(rows, in, out, x.data(), w.data(), b.data(), y.data());
    benchmark::DoNotOptimize(y.data());
  }
}

template <auto Fn>
void BM_StatPool(benchmark::State& state) {
  const std::size_t batch = 32, frames = 150, dim = static_cast<std::size_t>(state.range(0));
  const auto x = Random(batch * frames * dim, 7);
  const std::vector<std::size_t> lengths(batch, frames);
  std::vector<double> y(batch * 2 * dim);
  for (auto _ : state) {
    Fn(batch, frames, dim, lengths, x.data(), 1e-5, y.data());
    benchmark::DoNotOptimize(y.data());
  }
}

template <auto Fn>
void BM_SquaredDistances(benchmark::State& state) {
  const std::size_t q = 200, n = 800, dim = static_cast<std::size_t>(state.range(0));
  const auto a = Random(q * dim, 8), r = Random(n * dim, 9);
  std::vector<double> d(q * n);
  for (auto _ : state) {
    Fn(q, n, dim, a.data(), r.data(), d.data());
    benchmark::DoNotOptimize(d.data());
  }
}

}  // namespace

BENCHMARK(BM_TdnnForward<k::reference::TdnnForward>)->Name("TdnnForward/reference")->Arg(20)->Arg(256);
BENCHMARK(BM_TdnnForward<k::parallel::TdnnForward>)->Name("TdnnForward/parallel")->Arg(20)->Arg(256);
BENCHMARK(BM_LinearForward<k::reference::LinearForward>)->Name("LinearForward/reference")->Arg(1536);
BENCHMARK(BM_LinearForward<k::parallel::LinearForward>)->Name("LinearForward/parallel")->Arg(1536);
BENCHMARK(BM_StatPool<k::reference::StatPool>)->Name("StatPool/reference")->Arg(512)->Arg(768);
BENCHMARK(BM_StatPool<k::parallel::StatPool>)->Name("StatPool/parallel")->Arg(512)->Arg(768);
BENCHMARK(BM_SquaredDistances<k::reference::SquaredDistances>)->Name("SquaredDistances/reference")->Arg(1536);
BENCHMARK(BM_SquaredDistances<k::parallel::SquaredDistances>)->Name("SquaredDistances/parallel")->Arg(1536);

BENCHMARK_MAIN();
