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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stutter/experiments/config.hpp"
#include "stutter/manifest.hpp"

namespace stutter::experiments {

// Synthetic stand-in for a labelled stuttering corpus.
//
// Bundle mode: class c gets a mean vector of norm `separation` in a seeded
// random direction. Each utterance draws one unit-variance Gaussian offset
// around its class mean and repeats it over `frames` frames, adding
// independent per-frame jitter of std `jitter`. Layers listed in
// `signal_layers` carry that signal; the remaining layers are pure noise
// (zero mean, same offset/jitter statistics).
//
// Wav mode: class c is a tone at 250 * (c + 1) Hz, gated on and off at
// (c % 4 + 1) bursts per second, mixed into white noise; the tone amplitude
// grows with `separation` (0 gives pure noise).
//
// Records are split 60/20/20 into train/val/test within each class.
struct SynthSpec {
  std::size_t n_per_class = 50;
  std::size_t dim = kDefaultDim;
  std::size_t frames = 20;
  std::size_t num_layers = 13;
  std::vector<std::size_t> signal_layers;  // empty = every layer
  double separation = 10.0;
  double jitter = 0.1;
  double duration_s = 0.5;
  std::string mode = "bundle";  // bundle | wav | both
  std::uint64_t seed = 0;

  static constexpr std::size_t kDefaultDim = 768;

  static SynthSpec FromKeyValues(const KeyValues& kv);
  KeyValues ToKeyValues() const;
  void Validate() const;
};

struct SynthResult {
  std::filesystem::path manifest_path;
  DatasetManifest manifest;
};

// Writes <out>/manifest.csv plus <out>/bundles/*.emb and/or <out>/wav/*.wav.
SynthResult GenerateSynthetic(const SynthSpec& spec, const std::filesystem::path& out);

}  // namespace stutter::experiments
