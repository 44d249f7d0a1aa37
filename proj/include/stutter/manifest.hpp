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

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stutter/labels.hpp"

namespace stutter {

struct UtteranceRecord {
  std::string id;
  std::optional<std::filesystem::path> audio_path;
  std::optional<std::filesystem::path> embedding_path;
  Label label = Label::kNoDisfluency;
  Split split = Split::kTrain;
};

using ClassCounts = std::array<std::size_t, kNumClasses>;

// Immutable after construction; validation happens in the constructor.
class DatasetManifest {
 public:
  DatasetManifest() = default;
  explicit DatasetManifest(std::vector<UtteranceRecord> records);

  const std::vector<UtteranceRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  ClassCounts class_counts(Split split) const;
  std::size_t split_size(Split split) const;
  std::vector<const UtteranceRecord*> split_records(Split split) const;

  // Throws Error(kEmptySplit) when the split has no records.
  void RequireNonEmpty(Split split) const;

 private:
  std::vector<UtteranceRecord> records_;
};

inline constexpr const char* kManifestHeader =
    "id,audio_path,embedding_path,label,split";

// Relative paths inside the CSV are resolved against the manifest's
// directory. With check_files set, every referenced path must exist.
DatasetManifest LoadManifest(const std::filesystem::path& path,
                             bool check_files = false);

// Paths under the manifest's directory are written relative to it.
void WriteManifest(const DatasetManifest& manifest,
                   const std::filesystem::path& path);

// Inverse-frequency class weights: weight[i] = N / (C * N_i), where C is
// counts.size(). Throws Error(kZeroClassCount) if any class count is zero.
std::vector<double> ClassWeights(std::span<const std::size_t> counts);
std::vector<double> ClassWeights(const DatasetManifest& manifest, Split split);

}  // namespace stutter
