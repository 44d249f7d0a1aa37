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

#include "stutter/audio.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <numbers>

#include "stutter/error.hpp"
#include "stutter/io_util.hpp"

namespace stutter {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

// The FFTW planner is not thread-safe; execution with new arrays is.
std::mutex& PlannerMutex() {
  static std::mutex m;
  return m;
}

}  // namespace

// ---------------------------------------------------------------- WAV I/O --

Waveform DecodeWav(std::string_view bytes) {
  if (bytes.size() < 12 || bytes.substr(0, 4) != "RIFF" ||
      bytes.substr(8, 4) != "WAVE") {
    throw Error(ErrorCode::kBadWav, "missing RIFF/WAVE header");
  }
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::string_view data;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string_view id = bytes.substr(pos, 4);
    const std::uint32_t size = ReadLE<std::uint32_t>(bytes.data() + pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) {
      // Some writers leave the data size unset when streaming.
      if (id == "data") {
        data = bytes.substr(body);
        have_data = true;
        break;
      }
      throw Error(ErrorCode::kBadWav, "chunk '" + std::string(id) + "' truncated");
    }
    if (id == "fmt ") {
      if (size < 16) throw Error(ErrorCode::kBadWav, "fmt chunk too small");
      const char* p = bytes.data() + body;
      format = ReadLE<std::uint16_t>(p);
      channels = ReadLE<std::uint16_t>(p + 2);
      rate = ReadLE<std::uint32_t>(p + 4);
      bits = ReadLE<std::uint16_t>(p + 14);
      if (format == kFormatExtensible) {
        if (size < 40) throw Error(ErrorCode::kBadWav, "short extensible fmt");
        format = ReadLE<std::uint16_t>(p + 24);
      }
      have_fmt = true;
    } else if (id == "data") {
      data = bytes.substr(body, size);
      have_data = true;
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt || !have_data) throw Error(ErrorCode::kBadWav, "missing fmt or data chunk");
  if (channels != 1) throw Error(ErrorCode::kChannelCount, std::to_string(channels));
  if (rate == 0) throw Error(ErrorCode::kBadWav, "sample rate 0");

  Waveform wave;
  wave.sample_rate = static_cast<int>(rate);
  if (format == kFormatPcm && bits == 16) {
    const std::size_t n = data.size() / 2;
    wave.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      wave.samples[i] = ReadLE<std::int16_t>(data.data() + 2 * i) / 32768.0;
    }
  } else if (format == kFormatFloat && bits == 32) {
    const std::size_t n = data.size() / 4;
    wave.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      wave.samples[i] = std::clamp<double>(ReadLE<float>(data.data() + 4 * i), -1.0, 1.0);
    }
  } else {
    throw Error(ErrorCode::kBadWav, "unsupported encoding: format " +
                                        std::to_string(format) + ", " +
                                        std::to_string(bits) + " bits");
  }

  if (wave.sample_rate != kTargetSampleRate) {
    wave.samples = Resample(wave.samples, wave.sample_rate, kTargetSampleRate);
    wave.sample_rate = kTargetSampleRate;
  }
  return wave;
}

Waveform ReadWav(const std::filesystem::path& path) {
  try {
    return DecodeWav(ReadFileString(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kBadWav) {
      throw Error(ErrorCode::kBadWav, path.string() + ": " + e.detail());
    }
    throw;
  }
}

std::string EncodeWav(const Waveform& wave) {
  const auto n = static_cast<std::uint32_t>(wave.samples.size());
  std::string out;
  out.reserve(44 + 2 * n);
  out += "RIFF";
  AppendLE<std::uint32_t>(out, 36 + 2 * n);
  out += "WAVEfmt ";
  AppendLE<std::uint32_t>(out, 16);
  AppendLE<std::uint16_t>(out, kFormatPcm);
  AppendLE<std::uint16_t>(out, 1);
  AppendLE<std::uint32_t>(out, static_cast<std::uint32_t>(wave.sample_rate));
  AppendLE<std::uint32_t>(out, static_cast<std::uint32_t>(wave.sample_rate) * 2);
  AppendLE<std::uint16_t>(out, 2);
  AppendLE<std::uint16_t>(out, 16);
  out += "data";
  AppendLE<std::uint32_t>(out, 2 * n);
  for (double s : wave.samples) {
    const long v = std::clamp(std::lround(s * 32768.0), -32768L, 32767L);
    AppendLE<std::int16_t>(out, static_cast<std::int16_t>(v));
  }
  return out;
}

void WriteWav(const Waveform& wave, const std::filesystem::path& path) {
  WriteFileAtomic(path, EncodeWav(wave));
}

std::vector<double> Resample(std::span<const double> samples, int from_rate,
                             int to_rate) {
  if (from_rate <= 0 || to_rate <= 0) throw Error(ErrorCode::kBadWav, "bad rate");
  if (from_rate == to_rate) return {samples.begin(), samples.end()};

  constexpr double kZeroCrossings = 16.0;
  constexpr double kRolloff = 0.95;
  const double ratio = static_cast<double>(to_rate) / from_rate;
  // Cutoff in cycles per input sample.
  const double cutoff = 0.5 * std::min(1.0, ratio) * kRolloff;
  const double half_width = kZeroCrossings / (2.0 * cutoff);
  const auto n_out = static_cast<std::size_t>(
      std::ceil(static_cast<double>(samples.size()) * ratio));
  const auto n_in = static_cast<std::ptrdiff_t>(samples.size());

  std::vector<double> out(n_out);
  for (std::size_t n = 0; n < n_out; ++n) {
    const double center = static_cast<double>(n) / ratio;
    const auto lo = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(std::ceil(center - half_width)));
    const auto hi = std::min<std::ptrdiff_t>(n_in - 1, static_cast<std::ptrdiff_t>(std::floor(center + half_width)));
    double acc = 0.0;
    for (std::ptrdiff_t k = lo; k <= hi; ++k) {
      const double u = center - static_cast<double>(k);
      const double z = 2.0 * cutoff * u;
      const double sinc = z == 0.0 ? 1.0 : std::sin(std::numbers::pi * z) / (std::numbers::pi * z);
      const double window = 0.5 + 0.5 * std::cos(std::numbers::pi * u / half_width);
      acc += samples[static_cast<std::size_t>(k)] * 2.0 * cutoff * sinc * window;
    }
    out[n] = acc;
  }
  return out;
}

// ------------------------------------------------------------------- MFCC --

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::size_t MfccConfig::window_length() const {
  return static_cast<std::size_t>(std::lround(window_ms * sample_rate / 1000.0));
}

std::size_t MfccConfig::hop_length() const {
  return static_cast<std::size_t>(std::lround(hop_ms * sample_rate / 1000.0));
}

void MfccConfig::Validate() const {
  if (n_coeffs == 0 || n_coeffs > n_mels) {
    throw Error(ErrorCode::kBadConfig, "need 0 < n_coeffs <= n_mels");
  }
  if (sample_rate <= 0 || fmax > sample_rate / 2.0 || fmin < 0 || fmin >= fmax) {
    throw Error(ErrorCode::kBadConfig, "need 0 <= fmin < fmax <= sample_rate/2");
  }
  if (window_length() == 0 || hop_length() == 0 || window_length() > fft_size) {
    throw Error(ErrorCode::kBadConfig, "window must fit in fft_size");
  }
  if (!(log_floor > 0)) throw Error(ErrorCode::kBadConfig, "log_floor must be > 0");
}

std::size_t MfccFrameCount(std::size_t n_samples, const MfccConfig& config) {
  const std::size_t win = config.window_length();
  if (n_samples < win) return 0;
  return (n_samples - win) / config.hop_length() + 1;
}

struct MfccExtractor::Plan {
  fftw_plan plan = nullptr;
  ~Plan() {
    std::lock_guard lock(PlannerMutex());
    if (plan) fftw_destroy_plan(plan);
  }
};

namespace {

struct FftBuffers {
  double* in = nullptr;
  fftw_complex* out = nullptr;
  // Only fftw_execute* is documented as thread-safe.
  explicit FftBuffers(std::size_t n) {
    std::lock_guard lock(PlannerMutex());
    in = fftw_alloc_real(n);
    out = fftw_alloc_complex(n / 2 + 1);
  }
  ~FftBuffers() {
    std::lock_guard lock(PlannerMutex());
    fftw_free(in);
    fftw_free(out);
  }
  FftBuffers(const FftBuffers&) = delete;
  FftBuffers& operator=(const FftBuffers&) = delete;
};

}  // namespace

MfccExtractor::MfccExtractor(MfccConfig config)
    : config_(config), plan_(std::make_unique<Plan>()) {
  config_.Validate();
  const std::size_t win = config_.window_length();
  const std::size_t n_fft = config_.fft_size;
  const std::size_t n_bins = n_fft / 2 + 1;
  const std::size_t n_mels = config_.n_mels;

  window_.resize(win);
  for (std::size_t i = 0; i < win; ++i) {
    window_[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / win);
  }

  filterbank_.assign(n_mels * n_bins, 0.0);
  const double mel_lo = HzToMel(config_.fmin);
  const double mel_hi = HzToMel(config_.fmax);
  std::vector<double> edges(n_mels + 2);
  for (std::size_t m = 0; m < n_mels + 2; ++m) {
    edges[m] = MelToHz(mel_lo + (mel_hi - mel_lo) * m / (n_mels + 1));
  }
  for (std::size_t m = 0; m < n_mels; ++m) {
    const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * config_.sample_rate / n_fft;
      double w = 0.0;
      if (f > left && f <= center) {
        w = (f - left) / (center - left);
      } else if (f > center && f < right) {
        w = (right - f) / (right - center);
      }
      filterbank_[m * n_bins + k] = w;
    }
  }

  dct_.resize(n_mels * n_mels);
  for (std::size_t k = 0; k < n_mels; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / n_mels);
    for (std::size_t n = 0; n < n_mels; ++n) {
      dct_[k * n_mels + n] =
          scale * std::cos(std::numbers::pi * k * (2.0 * n + 1.0) / (2.0 * n_mels));
    }
  }

  FftBuffers scratch(n_fft);
  std::lock_guard lock(PlannerMutex());
  plan_->plan = fftw_plan_dft_r2c_1d(static_cast<int>(n_fft), scratch.in,
                                     scratch.out, FFTW_ESTIMATE);
  if (!plan_->plan) throw Error(ErrorCode::kBadConfig, "FFT planning failed");
}

MfccExtractor::~MfccExtractor() = default;

void MfccExtractor::ComputeFrame(const double* frame_start, double* fft_in,
                                 void* fft_out, double* mel, double* out) const {
  const std::size_t win = window_.size();
  const std::size_t n_fft = config_.fft_size;
  const std::size_t n_bins = n_fft / 2 + 1;
  const std::size_t n_mels = config_.n_mels;
  auto* spectrum = static_cast<fftw_complex*>(fft_out);

  for (std::size_t i = 0; i < win; ++i) fft_in[i] = frame_start[i] * window_[i];
  std::fill(fft_in + win, fft_in + n_fft, 0.0);
  fftw_execute_dft_r2c(plan_->plan, fft_in, spectrum);

  for (std::size_t m = 0; m < n_mels; ++m) {
    const double* row = filterbank_.data() + m * n_bins;
    double energy = 0.0;
    for (std::size_t k = 0; k < n_bins; ++k) {
      if (row[k] == 0.0) continue;
      const double power = spectrum[k][0] * spectrum[k][0] + spectrum[k][1] * spectrum[k][1];
      energy += row[k] * power;
    }
    mel[m] = std::log(std::max(energy, config_.log_floor));
  }
  for (std::size_t c = 0; c < config_.n_coeffs; ++c) {
    const double* basis = dct_.data() + c * n_mels;
    double acc = 0.0;
    for (std::size_t m = 0; m < n_mels; ++m) acc += basis[m] * mel[m];
    out[c] = acc;
  }
}

EmbeddingSequence MfccExtractor::Run(const Waveform& wave, bool parallel) const {
  if (wave.sample_rate != config_.sample_rate) {
    throw Error(ErrorCode::kBadConfig, "waveform rate " + std::to_string(wave.sample_rate) +
                                           " != MFCC rate " +
                                           std::to_string(config_.sample_rate));
  }
  const std::size_t frames = MfccFrameCount(wave.samples.size(), config_);
  if (frames == 0) {
    throw Error(ErrorCode::kTooShort, std::to_string(wave.samples.size()) +
                                          " samples < window " +
                                          std::to_string(config_.window_length()));
  }
  EmbeddingSequence out(config_.n_coeffs, frames);
  const std::size_t hop = config_.hop_length();
  const auto n_frames = static_cast<std::ptrdiff_t>(frames);

#pragma omp parallel if (parallel)
  {
    FftBuffers buf(config_.fft_size);
    std::vector<double> mel(config_.n_mels);
#pragma omp for schedule(static)
    for (std::ptrdiff_t t = 0; t < n_frames; ++t) {
      const auto tt = static_cast<std::size_t>(t);
      ComputeFrame(wave.samples.data() + tt * hop, buf.in, buf.out, mel.data(),
                   out.frame(tt).data());
    }
  }
  return out;
}

EmbeddingSequence MfccExtractor::Compute(const Waveform& wave) const {
  return Run(wave, true);
}

EmbeddingSequence MfccExtractor::ComputeSerial(const Waveform& wave) const {
  return Run(wave, false);
}

}  // namespace stutter
