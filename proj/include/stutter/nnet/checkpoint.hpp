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
#include <string_view>
#include <vector>

namespace stutter::nnet {

struct NamedTensor {
  std::string name;
  std::vector<std::uint64_t> shape;
  std::vector<double> values;

  bool operator==(const NamedTensor&) const = default;
};

// Versioned parameter container shared by the neural and classic models.
//
// Layout (all integers little-endian):
//   "STCK"            magic
//   u32 version       currently 1
//   u64 seed
//   u32 meta_len, meta bytes (JSON model/feature description)
//   u32 n_tensors, then per tensor:
//     u32 name_len, name bytes
//     u32 rank, u64 dims[rank]
//     f64 values[prod(dims)]
struct Checkpoint {
  std::string meta;
  std::uint64_t seed = 0;
  std::vector<NamedTensor> tensors;

  // Throws Error(kBadShape) when absent.
  const NamedTensor& Get(std::string_view name) const;
  bool Has(std::string_view name) const;
  void Add(std::string name, std::vector<std::uint64_t> shape, std::vector<double> values);

  bool operator==(const Checkpoint&) const = default;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string EncodeCheckpoint(const Checkpoint& ckpt);
Checkpoint DecodeCheckpoint(std::string_view bytes);
void SaveCheckpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

}  // namespace stutter::nnet
