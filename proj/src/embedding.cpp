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

#include "stutter/embedding.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>

#include "stutter/error.hpp"
#include "stutter/io_util.hpp"
#include "stutter/kernels.hpp"

namespace stutter {
namespace fs = std::filesystem;

namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};

struct Header {
  std::uint32_t n_layers, dim, frames;
};

Header ParseHeader(std::string_view bytes) {
  if (bytes.size() < kBundleHeaderBytes) {
    throw Error(ErrorCode::kTruncated, "header needs 16 bytes, got " +
                                           std::to_string(bytes.size()));
  }
  if (bytes.substr(0, 4) != std::string_view(kMagic, 4)) {
    throw Error(ErrorCode::kBadMagic, std::string(bytes.substr(0, 4)));
  }
  Header h{ReadLE<std::uint32_t>(bytes.data() + 4),
           ReadLE<std::uint32_t>(bytes.data() + 8),
           ReadLE<std::uint32_t>(bytes.data() + 12)};
  if (h.n_layers == 0 || h.dim == 0 || h.frames == 0) {
    throw Error(ErrorCode::kBadShape, "zero n_layers/dim/T in header");
  }
  const std::uint64_t expected = kBundleHeaderBytes + std::uint64_t{h.n_layers} *
                                                          h.dim * h.frames * 4;
  if (bytes.size() != expected) {
    throw Error(ErrorCode::kTruncated, "declared " + std::to_string(expected) +
                                           " bytes, found " +
                                           std::to_string(bytes.size()));
  }
  return h;
}

}  // namespace

EmbeddingSequence::EmbeddingSequence(std::size_t dim, std::size_t frames)
    : dim_(dim), frames_(frames), data_(dim * frames, 0.0) {}

EmbeddingSequence::EmbeddingSequence(std::size_t dim, std::size_t frames,
                                     std::vector<double> data)
    : dim_(dim), frames_(frames), data_(std::move(data)) {
  if (data_.size() != dim_ * frames_) {
    throw Error(ErrorCode::kBadShape, "data size " + std::to_string(data_.size()) +
                                          " != dim*T " +
                                          std::to_string(dim_ * frames_));
  }
}

std::string EncodeBundle(const EmbeddingBundle& bundle) {
  if (bundle.layers.empty()) throw Error(ErrorCode::kBadShape, "no layers");
  const std::size_t dim = bundle.dim();
  const std::size_t frames = bundle.frames();
  if (dim == 0 || frames == 0) throw Error(ErrorCode::kBadShape, "zero dim or T");
  for (const auto& layer : bundle.layers) {
    if (layer.dim() != dim || layer.frames() != frames) {
      throw Error(ErrorCode::kBadShape, "layers differ in (dim, T)");
    }
  }
  std::string out;
  out.reserve(kBundleHeaderBytes + bundle.num_layers() * dim * frames * 4);
  out.append(kMagic, 4);
  AppendLE<std::uint32_t>(out, static_cast<std::uint32_t>(bundle.num_layers()));
  AppendLE<std::uint32_t>(out, static_cast<std::uint32_t>(dim));
  AppendLE<std::uint32_t>(out, static_cast<std::uint32_t>(frames));
  for (const auto& layer : bundle.layers) {
    for (double v : layer.data()) AppendLE<float>(out, static_cast<float>(v));
  }
  return out;
}

EmbeddingBundle DecodeBundle(std::string_view bytes) {
  const Header h = ParseHeader(bytes);
  EmbeddingBundle bundle;
  bundle.layers.reserve(h.n_layers);
  const char* p = bytes.data() + kBundleHeaderBytes;
  const std::size_t count = std::size_t{h.dim} * h.frames;
  for (std::uint32_t l = 0; l < h.n_layers; ++l) {
    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i, p += 4) values[i] = ReadLE<float>(p);
    bundle.layers.emplace_back(h.dim, h.frames, std::move(values));
  }
  return bundle;
}

void WriteBundle(const EmbeddingBundle& bundle, const fs::path& path) {
  WriteFileAtomic(path, EncodeBundle(bundle));
}

EmbeddingBundle ReadBundle(const fs::path& path) {
  return DecodeBundle(ReadFileString(path));
}

BundleInfo InspectBundle(const fs::path& path) {
  const std::string bytes = ReadFileString(path);
  const Header h = ParseHeader(bytes);
  return {h.n_layers, h.dim, h.frames, bytes.size()};
}

void ValidateBundle(const EmbeddingBundle& bundle, std::size_t expect_layers,
                    std::size_t expect_dim) {
  if (expect_layers != 0 && bundle.num_layers() != expect_layers) {
    throw Error(ErrorCode::kBadShape, "expected " + std::to_string(expect_layers) +
                                          " layers, got " +
                                          std::to_string(bundle.num_layers()));
  }
  for (const auto& layer : bundle.layers) {
    if (layer.dim() != bundle.dim() || layer.frames() != bundle.frames()) {
      throw Error(ErrorCode::kBadShape, "layers differ in (dim, T)");
    }
    for (double v : layer.data()) {
      if (!std::isfinite(v)) throw Error(ErrorCode::kBadShape, "non-finite value");
    }
  }
  if (expect_dim != 0 && bundle.dim() != expect_dim) {
    throw Error(ErrorCode::kBadShape, "expected dim " + std::to_string(expect_dim) +
                                          ", got " + std::to_string(bundle.dim()));
  }
}

PooledVector Pool(const EmbeddingSequence& seq) {
  if (seq.frames() == 0) throw Error(ErrorCode::kEmptySequence, "T=0");
  if (seq.dim() == 0) throw Error(ErrorCode::kBadShape, "dim=0");
  PooledVector out(2 * seq.dim());
  const std::size_t lengths[1] = {seq.frames()};
  kernels::parallel::StatPool(1, seq.frames(), seq.dim(), lengths,
                              seq.data().data(), 0.0, out.data());
  return out;
}

PooledVector ConcatPooled(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) {
    throw Error(ErrorCode::kBadShape, "cannot concatenate an empty pooled vector");
  }
  PooledVector out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

EmbeddingSequence ConcatSequences(const EmbeddingSequence& a,
                                  const EmbeddingSequence& b) {
  if (a.frames() != b.frames()) {
    throw Error(ErrorCode::kFrameCountMismatch,
                std::to_string(a.frames()) + " vs " + std::to_string(b.frames()));
  }
  EmbeddingSequence out(a.dim() + b.dim(), a.frames());
  for (std::size_t t = 0; t < a.frames(); ++t) {
    auto dst = out.frame(t);
    auto fa = a.frame(t);
    auto fb = b.frame(t);
    std::copy(fa.begin(), fa.end(), dst.begin());
    std::copy(fb.begin(), fb.end(), dst.begin() + static_cast<std::ptrdiff_t>(a.dim()));
  }
  return out;
}

EmbeddingSequence SumLayers(const EmbeddingBundle& bundle,
                            std::span<const std::size_t> indices) {
  if (indices.empty()) throw Error(ErrorCode::kEmptyIndexSet, "sum_layers");
  for (std::size_t idx : indices) {
    if (idx >= bundle.num_layers()) {
      throw Error(ErrorCode::kBadShape, "layer index " + std::to_string(idx) +
                                            " out of range");
    }
  }
  EmbeddingSequence out = bundle.layers[indices[0]];
  for (std::size_t j = 1; j < indices.size(); ++j) {
    const auto& src = bundle.layers[indices[j]].data();
    auto& dst = out.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
  return out;
}

}  // namespace stutter
