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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "stutter/labels.hpp"

namespace stutter::experiments {

// Flat `key = value` text. Blank lines and lines starting with '#' are
// ignored; keys are unique.
class KeyValues {
 public:
  static KeyValues Parse(std::string_view text);
  static KeyValues Load(const std::filesystem::path& path);

  void Set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  bool Has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  // Typed accessors; a malformed value throws Error(kBadConfig) naming the
  // key. Every accessed key is remembered for RejectUnknown.
  std::string String(const std::string& key, const std::string& fallback) const;
  std::int64_t Int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t Uint(const std::string& key, std::uint64_t fallback) const;
  double Double(const std::string& key, double fallback) const;
  bool Bool(const std::string& key, bool fallback) const;
  std::vector<std::size_t> Sizes(const std::string& key,
                                 const std::vector<std::size_t>& fallback) const;
  std::vector<std::string> List(const std::string& key,
                                const std::vector<std::string>& fallback) const;

  // Throws Error(kBadConfig) for any key never read through an accessor.
  void RejectUnknown() const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

std::string JoinSizes(const std::vector<std::size_t>& v);

// SHA-256 of the sorted `key=value\n` listing with any `out` value blanked.
std::string ConfigHash(KeyValues kv);

// Everything a `train` run needs. Defaults follow the desk-scale setup.
struct RunConfig {
  std::filesystem::path manifest;
  std::string features = "mfcc";
  std::string model = "mb-stutternet";
  std::string loss = "ce";                  // ce | wce | joint
  std::string disfluent_target = "masked";  // masked | all
  Split train_split = Split::kTrain;
  Split eval_split = Split::kValidation;
  std::filesystem::path out = "run";
  std::uint64_t seed = 0;

  // neural training
  double lr = 1e-2;
  std::size_t batch_size = 128;
  std::size_t max_epochs = 50;
  std::size_t patience = 7;
  std::size_t channels = 64;
  std::vector<std::size_t> fc_hidden = {64, 64};
  std::vector<std::size_t> hidden = {64, 64};
  double dropout = 0.3;

  // classic classifiers
  bool standardize = true;
  std::size_t knn_k = 5;
  double svm_c = 1.0;
  std::size_t svm_epochs = 20;
  double gnb_var_smoothing = 1e-9;

  static RunConfig FromKeyValues(const KeyValues& kv);
  // Fully resolved, including defaults, in a fixed key order.
  KeyValues ToKeyValues() const;
  // SHA-256 of the canonical `key=value` listing.
  std::string Hash() const;
  // Model/feature/loss compatibility; throws Error(kBadConfig).
  void Validate() const;
};

bool IsSequenceModel(const std::string& model);
bool IsNeuralModel(const std::string& model);

// Layer sweep: classic classifiers on pooled single-layer features.
struct SweepConfig {
  std::filesystem::path manifest;
  std::vector<std::size_t> layers;  // empty = every layer in the bundles
  std::vector<std::string> classifiers = {"svm", "knn", "gnb"};
  // "layer" pools L_k alone; "mfcc+layer" prepends pooled MFCCs.
  std::vector<std::string> variants = {"layer"};
  Split train_split = Split::kTrain;
  Split eval_split = Split::kValidation;
  std::filesystem::path out = "sweep";
  std::uint64_t seed = 0;
  bool standardize = true;
  std::size_t knn_k = 5;
  double svm_c = 1.0;
  std::size_t svm_epochs = 20;
  double gnb_var_smoothing = 1e-9;

  static SweepConfig FromKeyValues(const KeyValues& kv);
  KeyValues ToKeyValues() const;
  std::string Hash() const;
};

}  // namespace stutter::experiments
