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
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stutter {

// A dim x T frame-level feature sequence, stored frame-major
// (data[t * dim + d]) to match the on-disk layout.
class EmbeddingSequence {
 public:
  EmbeddingSequence() = default;
  EmbeddingSequence(std::size_t dim, std::size_t frames);
  EmbeddingSequence(std::size_t dim, std::size_t frames, std::vector<double> data);

  std::size_t dim() const { return dim_; }
  std::size_t frames() const { return frames_; }

  double& at(std::size_t d, std::size_t t) { return data_[t * dim_ + d]; }
  double at(std::size_t d, std::size_t t) const { return data_[t * dim_ + d]; }

  std::span<const double> frame(std::size_t t) const {
    return {data_.data() + t * dim_, dim_};
  }
  std::span<double> frame(std::size_t t) { return {data_.data() + t * dim_, dim_}; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  bool operator==(const EmbeddingSequence&) const = default;

 private:
  std::size_t dim_ = 0;
  std::size_t frames_ = 0;
  std::vector<double> data_;
};

// All layer streams for one utterance. Index 0 is the feature-encoder
// projection stream, indices 1..12 the contextual layers, so L_k is layer k.
struct EmbeddingBundle {
  std::vector<EmbeddingSequence> layers;

  std::size_t num_layers() const { return layers.size(); }
  std::size_t dim() const { return layers.empty() ? 0 : layers[0].dim(); }
  std::size_t frames() const { return layers.empty() ? 0 : layers[0].frames(); }

  bool operator==(const EmbeddingBundle&) const = default;
};

inline constexpr std::size_t kBundleLayers = 13;
inline constexpr std::size_t kEmbeddingDim = 768;
inline constexpr std::size_t kBundleHeaderBytes = 16;

// EMB1: "EMB1", u32 n_layers, u32 dim, u32 T (little-endian), followed by
// n_layers * T * dim float32 values in [layer][frame][dim] order. Values are
// narrowed to float32 on write; the write is atomic.
void WriteBundle(const EmbeddingBundle& bundle, const std::filesystem::path& path);
EmbeddingBundle ReadBundle(const std::filesystem::path& path);

std::string EncodeBundle(const EmbeddingBundle& bundle);
EmbeddingBundle DecodeBundle(std::string_view bytes);

struct BundleInfo {
  std::size_t num_layers = 0;
  std::size_t dim = 0;
  std::size_t frames = 0;
  std::size_t file_bytes = 0;
};

// Header-only inspection plus the payload-size check.
BundleInfo InspectBundle(const std::filesystem::path& path);

// Structural check against the expected layer count / width (0 = any).
// Throws Error(kBadShape) on mismatch.
void ValidateBundle(const EmbeddingBundle& bundle, std::size_t expect_layers,
                    std::size_t expect_dim = 0);

// mean over frames followed by population std; length 2 * dim.
using PooledVector = std::vector<double>;

PooledVector Pool(const EmbeddingSequence& seq);
PooledVector ConcatPooled(std::span<const double> a, std::span<const double> b);
EmbeddingSequence ConcatSequences(const EmbeddingSequence& a, const EmbeddingSequence& b);
EmbeddingSequence SumLayers(const EmbeddingBundle& bundle,
                            std::span<const std::size_t> indices);

}  // namespace stutter
