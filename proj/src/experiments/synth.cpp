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

#include "stutter/experiments/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "stutter/audio.hpp"
#include "stutter/embedding.hpp"
#include "stutter/error.hpp"
#include "stutter/experiments/features.hpp"
#include "stutter/io_util.hpp"

namespace stutter::experiments {
namespace {

// SplitMix64 finalizer: decorrelates per-utterance and per-layer streams.
std::uint64_t Mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ull * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kMeanStream = 0x6D65616E;
constexpr std::uint64_t kSplitStream = 0x73706C74;

std::string UttId(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "utt%05zu", i);
  return buf;
}

// [layer][class][dim]; noise layers stay zero.
std::vector<std::vector<double>> ClassMeans(const SynthSpec& s) {
  std::vector<std::vector<double>> means(s.num_layers,
                                         std::vector<double>(kNumClasses * s.dim, 0.0));
  for (std::size_t layer = 0; layer < s.num_layers; ++layer) {
    const bool signal = s.signal_layers.empty() ||
                        std::find(s.signal_layers.begin(), s.signal_layers.end(), layer) !=
                            s.signal_layers.end();
    if (!signal) continue;
    std::mt19937_64 rng(Mix(s.seed ^ kMeanStream, layer));
    std::normal_distribution<double> g;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      double* m = means[layer].data() + c * s.dim;
      double norm = 0.0;
      for (std::size_t k = 0; k < s.dim; ++k) {
        m[k] = g(rng);
        norm += m[k] * m[k];
      }
      norm = std::sqrt(norm);
      for (std::size_t k = 0; k < s.dim; ++k) m[k] *= s.separation / norm;
    }
  }
  return means;
}

EmbeddingBundle MakeBundle(const SynthSpec& s, const std::vector<std::vector<double>>& means,
                           int label, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  EmbeddingBundle b;
  for (std::size_t layer = 0; layer < s.num_layers; ++layer) {
    const double* mu = means[layer].data() + static_cast<std::size_t>(label) * s.dim;
    std::vector<double> offset(s.dim);
    for (std::size_t k = 0; k < s.dim; ++k) offset[k] = mu[k] + g(rng);
    EmbeddingSequence seq(s.dim, s.frames);
    for (std::size_t t = 0; t < s.frames; ++t)
      for (std::size_t k = 0; k < s.dim; ++k) seq.at(k, t) = offset[k] + s.jitter * g(rng);
    b.layers.push_back(std::move(seq));
  }
  return b;
}

Waveform MakeWave(const SynthSpec& s, int label, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto n = static_cast<std::size_t>(std::llround(s.duration_s * kTargetSampleRate));
  const double freq = 250.0 * (label + 1) * (1.0 + 0.04 * (u(rng) - 0.5));
  const double bursts = static_cast<double>(label % 4 + 1);
  const double phase = 2.0 * std::numbers::pi * u(rng);
  const double gate_phase = 2.0 * std::numbers::pi * u(rng);
  const double amp = std::min(0.8, 0.02 * s.separation);
  Waveform w;
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / kTargetSampleRate;
    const double gate =
        std::sin(2.0 * std::numbers::pi * bursts * t + gate_phase) > 0.0 ? 1.0 : 0.2;
    const double v = amp * gate * std::sin(2.0 * std::numbers::pi * freq * t + phase) + 0.1 * g(rng);
    w.samples[i] = std::clamp(v, -1.0, 1.0);
  }
  return w;
}

}  // namespace

SynthSpec SynthSpec::FromKeyValues(const KeyValues& kv) {
  SynthSpec s;
  s.n_per_class = kv.Uint("n_per_class", s.n_per_class);
  s.dim = kv.Uint("dim", s.dim);
  s.frames = kv.Uint("frames", s.frames);
  s.num_layers = kv.Uint("num_layers", s.num_layers);
  s.signal_layers = kv.Sizes("signal_layers", s.signal_layers);
  s.separation = kv.Double("separation", s.separation);
  s.jitter = kv.Double("jitter", s.jitter);
  s.duration_s = kv.Double("duration_s", s.duration_s);
  s.mode = kv.String("mode", s.mode);
  s.seed = kv.Uint("seed", s.seed);
  kv.RejectUnknown();
  s.Validate();
  return s;
}

KeyValues SynthSpec::ToKeyValues() const {
  KeyValues kv;
  kv.Set("n_per_class", std::to_string(n_per_class));
  kv.Set("dim", std::to_string(dim));
  kv.Set("frames", std::to_string(frames));
  kv.Set("num_layers", std::to_string(num_layers));
  kv.Set("signal_layers", JoinSizes(signal_layers));
  kv.Set("separation", FormatDouble(separation));
  kv.Set("jitter", FormatDouble(jitter));
  kv.Set("duration_s", FormatDouble(duration_s));
  kv.Set("mode", mode);
  kv.Set("seed", std::to_string(seed));
  return kv;
}

void SynthSpec::Validate() const {
  if (!(separation >= 0.0)) throw Error(ErrorCode::kBadConfig, "separation must be >= 0");
  if (n_per_class == 0 || dim == 0 || frames == 0 || num_layers == 0)
    throw Error(ErrorCode::kBadConfig, "n_per_class, dim, frames and num_layers must be >= 1");
  if (jitter < 0.0) throw Error(ErrorCode::kBadConfig, "jitter must be >= 0");
  if (mode != "bundle" && mode != "wav" && mode != "both")
    throw Error(ErrorCode::kBadConfig, "mode must be bundle, wav or both");
  if (mode != "bundle" && !(duration_s * kTargetSampleRate >= 400.0))
    throw Error(ErrorCode::kBadConfig, "duration_s is shorter than one MFCC window");
  for (std::size_t l : signal_layers)
    if (l >= num_layers)
      throw Error(ErrorCode::kBadConfig, "signal layer " + std::to_string(l) + " >= num_layers");
}

SynthResult GenerateSynthetic(const SynthSpec& spec, const std::filesystem::path& out) {
  spec.Validate();
  const bool bundles = spec.mode != "wav";
  const bool waves = spec.mode != "bundle";
  std::filesystem::create_directories(out);
  if (bundles) std::filesystem::create_directories(out / "bundles");
  if (waves) std::filesystem::create_directories(out / "wav");

  const std::size_t n = spec.n_per_class * kNumClasses;
  std::vector<UtteranceRecord> records(n);
  for (std::size_t i = 0; i < n; ++i) {
    records[i].id = UttId(i);
    records[i].label = LabelFromId(static_cast<int>(i % kNumClasses));
    if (bundles) records[i].embedding_path = out / "bundles" / (records[i].id + ".emb");
    if (waves) records[i].audio_path = out / "wav" / (records[i].id + ".wav");
  }

  // Stratified 60/20/20 split on a seeded permutation of each class.
  std::mt19937_64 split_rng(Mix(spec.seed ^ kSplitStream, 0));
  const auto n_train = static_cast<std::size_t>(std::llround(0.6 * spec.n_per_class));
  const auto n_val = static_cast<std::size_t>(std::llround(0.2 * spec.n_per_class));
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    std::vector<std::size_t> idx;
    for (std::size_t i = c; i < n; i += kNumClasses) idx.push_back(i);
    std::shuffle(idx.begin(), idx.end(), split_rng);
    for (std::size_t j = 0; j < idx.size(); ++j)
      records[idx[j]].split = j < n_train ? Split::kTrain
                              : j < n_train + n_val ? Split::kValidation
                                                    : Split::kTest;
  }

  const auto means = bundles ? ClassMeans(spec) : std::vector<std::vector<double>>{};
  ParallelForEach(n, [&](std::size_t i) {
    const int label = LabelId(records[i].label);
    if (bundles) {
      std::mt19937_64 rng(Mix(spec.seed, 2 * i));
      WriteBundle(MakeBundle(spec, means, label, rng), *records[i].embedding_path);
    }
    if (waves) {
      std::mt19937_64 rng(Mix(spec.seed, 2 * i + 1));
      WriteWav(MakeWave(spec, label, rng), *records[i].audio_path);
    }
  });

  SynthResult result{out / "manifest.csv", DatasetManifest(std::move(records))};
  WriteManifest(result.manifest, result.manifest_path);
  return result;
}

}  // namespace stutter::experiments
