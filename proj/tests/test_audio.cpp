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
#include <numbers>
#include <random>

#include "doctest.h"
#include "stutter/audio.hpp"
#include "stutter/error.hpp"
#include "stutter/io_util.hpp"
#include "test_util.hpp"

using namespace stutter;

namespace {

std::string Pcm16Wav(std::uint16_t channels, std::uint32_t rate,
                     const std::vector<std::int16_t>& samples) {
  std::string out = "RIFF";
  AppendLE<std::uint32_t>(out, static_cast<std::uint32_t>(36 + 2 * samples.size()));
  out += "WAVEfmt ";
  AppendLE<std::uint32_t>(out, 16);
  AppendLE<std::uint16_t>(out, 1);
  AppendLE<std::uint16_t>(out, channels);
  AppendLE<std::uint32_t>(out, rate);
  AppendLE<std::uint32_t>(out, rate * 2 * channels);
  AppendLE<std::uint16_t>(out, static_cast<std::uint16_t>(2 * channels));
  AppendLE<std::uint16_t>(out, 16);
  out += "data";
  AppendLE<std::uint32_t>(out, static_cast<std::uint32_t>(2 * samples.size()));
  for (auto s : samples) AppendLE<std::int16_t>(out, s);
  return out;
}

std::string Float32Wav(std::uint32_t rate, const std::vector<float>& samples) {
  std::string out = "RIFF";
  AppendLE<std::uint32_t>(out, static_cast<std::uint32_t>(36 + 4 * samples.size()));
  out += "WAVEfmt ";
  AppendLE<std::uint32_t>(out, 16);
  AppendLE<std::uint16_t>(out, 3);
  AppendLE<std::uint16_t>(out, 1);
  AppendLE<std::uint32_t>(out, rate);
  AppendLE<std::uint32_t>(out, rate * 4);
  AppendLE<std::uint16_t>(out, 4);
  AppendLE<std::uint16_t>(out, 32);
  out += "data";
  AppendLE<std::uint32_t>(out, static_cast<std::uint32_t>(4 * samples.size()));
  for (auto s : samples) AppendLE<float>(out, s);
  return out;
}

Waveform Noise(std::size_t n, unsigned seed, double amp = 0.3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, amp);
  Waveform w;
  w.samples.resize(n);
  for (auto& s : w.samples) s = std::clamp(g(rng), -1.0, 1.0);
  return w;
}

}  // namespace

TEST_CASE("PCM16 silence decodes to zeros") {
  const auto wave = DecodeWav(Pcm16Wav(1, 16000, std::vector<std::int16_t>(16000, 0)));
  CHECK(wave.sample_rate == 16000);
  REQUIRE(wave.samples.size() == 16000);
  for (double s : wave.samples) CHECK(s == 0.0);
}

TEST_CASE("PCM16 full scale normalizes by 32768") {
  const auto wave = DecodeWav(Pcm16Wav(1, 16000, {32767, -32768}));
  CHECK(wave.samples[0] == 32767.0 / 32768.0);
  CHECK(wave.samples[0] == doctest::Approx(0.99997).epsilon(1e-5));
  CHECK(wave.samples[1] == -1.0);
}

TEST_CASE("float32 WAV decodes") {
  const auto wave = DecodeWav(Float32Wav(16000, {0.5f, -0.25f, 0.0f}));
  REQUIRE(wave.samples.size() == 3);
  CHECK(wave.samples[0] == 0.5);
  CHECK(wave.samples[1] == -0.25);
}

TEST_CASE("multi-channel and malformed WAVs are rejected") {
  try {
    DecodeWav(Pcm16Wav(2, 16000, {0, 0, 0, 0}));
    FAIL("stereo accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kChannelCount);
    CHECK(e.detail() == "2");
  }
  CHECK_THROWS_AS(DecodeWav("RIFX...."), Error);
  CHECK_THROWS_AS(DecodeWav(Pcm16Wav(1, 16000, {1}).substr(0, 30)), Error);
}

TEST_CASE("WAV write/read round trip at 16 kHz") {
  testing::TempDir dir;
  Waveform w;
  for (int i = -5; i <= 5; ++i) w.samples.push_back(i / 5.0 * (32767.0 / 32768.0));
  WriteWav(w, dir / "x.wav");
  const auto back = ReadWav(dir / "x.wav");
  REQUIRE(back.samples.size() == w.samples.size());
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    CHECK(std::abs(back.samples[i] - w.samples[i]) < 1.0 / 32768.0);
  }
}

TEST_CASE("non-16k input is resampled on load") {
  // 8 kHz 440 Hz tone; after upsampling the interior should follow the
  // analytic tone at 16 kHz.
  std::vector<std::int16_t> pcm(8000);
  for (std::size_t i = 0; i < pcm.size(); ++i) {
    pcm[i] = static_cast<std::int16_t>(
        std::lround(16000.0 * std::sin(2 * std::numbers::pi * 440.0 * i / 8000.0)));
  }
  const auto wave = DecodeWav(Pcm16Wav(1, 8000, pcm));
  CHECK(wave.sample_rate == 16000);
  REQUIRE(wave.samples.size() == 16000);
  double max_err = 0.0;
  for (std::size_t n = 2000; n < 14000; ++n) {
    const double expect = 16000.0 / 32768.0 * std::sin(2 * std::numbers::pi * 440.0 * n / 16000.0);
    max_err = std::max(max_err, std::abs(wave.samples[n] - expect));
  }
  CHECK(max_err < 5e-3);
}

TEST_CASE("MFCC frame count") {
  MfccConfig cfg;
  CHECK(cfg.window_length() == 400);
  CHECK(cfg.hop_length() == 160);
  MfccExtractor mfcc(cfg);
  const auto seq = mfcc.Compute(Noise(16000, 1));
  CHECK(seq.dim() == 20);
  CHECK(seq.frames() == 98);

  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> len(400, 20000);
  for (int i = 0; i < 50; ++i) {
    const std::size_t n = len(rng);
    CHECK(mfcc.Compute(Noise(n, i)).frames() == (n - 400) / 160 + 1);
  }
  CHECK_THROWS_AS(mfcc.Compute(Noise(399, 2)), Error);
  try {
    mfcc.Compute(Noise(399, 2));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kTooShort);
  }
}

TEST_CASE("MFCC of silence is the DCT of a constant log floor") {
  MfccExtractor mfcc;
  Waveform zero;
  zero.samples.assign(4000, 0.0);
  const auto seq = mfcc.Compute(zero);
  const double c0 = std::sqrt(40.0) * std::log(1e-10);
  for (std::size_t t = 0; t < seq.frames(); ++t) {
    CHECK(std::abs(seq.at(0, t) - c0) <= 1e-9);
    for (std::size_t c = 1; c < 20; ++c) CHECK(std::abs(seq.at(c, t)) <= 1e-9);
  }
}

TEST_CASE("MFCC gain changes only c0") {
  MfccExtractor mfcc;
  const auto base = Noise(8000, 11, 0.1);
  for (double k : {0.5, 2.0, 7.0}) {
    Waveform scaled = base;
    for (auto& s : scaled.samples) s *= k;
    const auto a = mfcc.Compute(base);
    const auto b = mfcc.Compute(scaled);
    for (std::size_t t = 0; t < a.frames(); ++t) {
      CHECK(b.at(0, t) - a.at(0, t) ==
            doctest::Approx(std::sqrt(40.0) * 2.0 * std::log(k)).epsilon(1e-9));
      for (std::size_t c = 1; c < 20; ++c) CHECK(std::abs(b.at(c, t) - a.at(c, t)) <= 1e-6);
    }
  }
}

TEST_CASE("DCT matrix is orthonormal; filterbank is a partition bound") {
  MfccExtractor mfcc;
  const auto& m = mfcc.dct_matrix();
  const std::size_t n = 40;
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < n; ++k) dot += m[k * n + i] * m[k * n + j];
      worst = std::max(worst, std::abs(dot - (i == j ? 1.0 : 0.0)));
    }
  }
  CHECK(worst <= 1e-10);

  const auto& fb = mfcc.filterbank();
  const std::size_t bins = 257;
  for (double w : fb) CHECK(w >= 0.0);
  for (std::size_t k = 0; k < bins; ++k) {
    double total = 0.0;
    for (std::size_t b = 0; b < 40; ++b) total += fb[b * bins + k];
    CHECK(total <= 1.0 + 1e-6);
  }
}

TEST_CASE("MFCC frame matches a naive DFT oracle") {
  // Independent route: O(N^2) DFT and directly evaluated mel/DCT formulas.
  const auto wave = Noise(1200, 5);
  MfccExtractor mfcc;
  const auto seq = mfcc.Compute(wave);
  const std::size_t t = 3;
  const std::size_t n_fft = 512;
  std::vector<double> power(257);
  for (std::size_t k = 0; k < 257; ++k) {
    double re = 0, im = 0;
    for (std::size_t i = 0; i < 400; ++i) {
      const double w = 0.5 - 0.5 * std::cos(2 * std::numbers::pi * i / 400.0);
      const double x = wave.samples[t * 160 + i] * w;
      re += x * std::cos(2 * std::numbers::pi * k * i / n_fft);
      im -= x * std::sin(2 * std::numbers::pi * k * i / n_fft);
    }
    power[k] = re * re + im * im;
  }
  auto mel = [](double f) { return 2595.0 * std::log10(1 + f / 700.0); };
  auto hz = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1); };
  std::vector<double> logmel(40);
  for (std::size_t b = 0; b < 40; ++b) {
    const double l = hz(mel(20) + (mel(7600) - mel(20)) * b / 41.0);
    const double c = hz(mel(20) + (mel(7600) - mel(20)) * (b + 1) / 41.0);
    const double r = hz(mel(20) + (mel(7600) - mel(20)) * (b + 2) / 41.0);
    double e = 0;
    for (std::size_t k = 0; k < 257; ++k) {
      const double f = k * 16000.0 / n_fft;
      double w = 0;
      if (f > l && f <= c) w = (f - l) / (c - l);
      else if (f > c && f < r) w = (r - f) / (r - c);
      e += w * power[k];
    }
    logmel[b] = std::log(std::max(e, 1e-10));
  }
  for (std::size_t q = 0; q < 20; ++q) {
    double acc = 0;
    for (std::size_t b = 0; b < 40; ++b) {
      acc += std::cos(std::numbers::pi * q * (2 * b + 1) / 80.0) * logmel[b];
    }
    acc *= std::sqrt((q == 0 ? 1.0 : 2.0) / 40.0);
    CHECK(seq.at(q, t) == doctest::Approx(acc).epsilon(1e-9));
  }
}

TEST_CASE("MFCC is deterministic and thread-count independent") {
  MfccExtractor mfcc;
  const auto wave = Noise(32000, 9);
  const auto a = mfcc.Compute(wave);
  const auto b = mfcc.Compute(wave);
  const auto c = mfcc.ComputeSerial(wave);
  CHECK(a == b);
  CHECK(a == c);
}

TEST_CASE("invalid MFCC configs") {
  MfccConfig cfg;
  cfg.n_coeffs = 41;
  CHECK_THROWS_AS(MfccExtractor{cfg}, Error);
  cfg = {};
  cfg.fmax = 9000;
  CHECK_THROWS_AS(MfccExtractor{cfg}, Error);
}
