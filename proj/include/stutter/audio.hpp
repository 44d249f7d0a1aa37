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
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stutter/embedding.hpp"

namespace stutter {

inline constexpr int kTargetSampleRate = 16000;

// Mono samples in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = kTargetSampleRate;
};

// Reads RIFF/WAVE with PCM16 or IEEE float32 mono data. Anything not at
// 16 kHz is resampled on load. Multi-channel input is rejected
// (Error(kChannelCount)) rather than downmixed.
Waveform ReadWav(const std::filesystem::path& path);
Waveform DecodeWav(std::string_view bytes);

// PCM16 mono; samples are scaled by 32768 and clipped to the int16 range.
void WriteWav(const Waveform& wave, const std::filesystem::path& path);
std::string EncodeWav(const Waveform& wave);

// Band-limited resampling with a Hann-windowed sinc kernel spanning 16
// zero crossings of the lower rate on each side. The cutoff sits at 0.95 of
// the lower Nyquist frequency; aliasing rejection is roughly 40 dB.
std::vector<double> Resample(std::span<const double> samples, int from_rate,
                             int to_rate);

struct MfccConfig {
  std::size_t n_coeffs = 20;
  std::size_t n_mels = 40;
  double window_ms = 25.0;
  double hop_ms = 10.0;
  std::size_t fft_size = 512;
  double fmin = 20.0;
  double fmax = 7600.0;
  double log_floor = 1e-10;
  int sample_rate = kTargetSampleRate;

  std::size_t window_length() const;
  std::size_t hop_length() const;
  void Validate() const;
};

// floor((n - win) / hop) + 1 for n >= win, else 0.
std::size_t MfccFrameCount(std::size_t n_samples, const MfccConfig& config);

// Framing -> periodic Hann -> |FFT|^2 -> HTK-mel triangular filterbank ->
// log(max(x, floor)) -> orthonormal DCT-II -> first n_coeffs. Frames are
// processed in parallel; ComputeSerial is the single-threaded reference.
class MfccExtractor {
 public:
  explicit MfccExtractor(MfccConfig config = {});
  ~MfccExtractor();
  MfccExtractor(const MfccExtractor&) = delete;
  MfccExtractor& operator=(const MfccExtractor&) = delete;

  const MfccConfig& config() const { return config_; }

  // n_coeffs x T; throws Error(kTooShort) below one window.
  EmbeddingSequence Compute(const Waveform& wave) const;
  EmbeddingSequence ComputeSerial(const Waveform& wave) const;

  // [n_mels][fft_size / 2 + 1]
  const std::vector<double>& filterbank() const { return filterbank_; }
  // [n_mels][n_mels], row k = basis function k
  const std::vector<double>& dct_matrix() const { return dct_; }

 private:
  struct Plan;

  void ComputeFrame(const double* frame_start, double* fft_in, void* fft_out,
                    double* mel, double* out) const;
  EmbeddingSequence Run(const Waveform& wave, bool parallel) const;

  MfccConfig config_;
  std::vector<double> window_;
  std::vector<double> filterbank_;
  std::vector<double> dct_;
  std::unique_ptr<Plan> plan_;
};

double HzToMel(double hz);
double MelToHz(double mel);

}  // namespace stutter
