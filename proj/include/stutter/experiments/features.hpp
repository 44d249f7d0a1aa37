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

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "stutter/audio.hpp"
#include "stutter/classic.hpp"
#include "stutter/embedding.hpp"
#include "stutter/manifest.hpp"
#include "stutter/nnet/trainer.hpp"

namespace stutter::experiments {

// Textual forms:
//   mfcc              20 x T MFCCs from the audio file
//   layer:K           bundle layer K
//   concat:K1,K2,...  frame-wise concatenation of bundle layers
//   sum:all | sum:i,j element-wise sum of bundle layers
//   mfcc:layer:K      MFCCs joined with layer K
// Pooled features pool each part separately and concatenate the results, so
// `mfcc:layer:K` works even though MFCC and embedding frame rates differ; as
// a sequence it requires equal frame counts.
struct FeatureSpec {
  enum class Kind { kMfcc, kLayer, kConcat, kSum, kMfccLayer };

  Kind kind = Kind::kMfcc;
  std::vector<std::size_t> layers;  // empty with kSum means every layer

  static FeatureSpec Parse(std::string_view text);
  std::string ToString() const;
  bool needs_audio() const { return kind == Kind::kMfcc || kind == Kind::kMfccLayer; }
  bool needs_bundle() const { return kind != Kind::kMfcc; }
};

class FeatureExtractor {
 public:
  explicit FeatureExtractor(MfccConfig mfcc = {}) : mfcc_(mfcc) {}

  // Both throw Error(kMissingFile) naming the utterance when its file is
  // absent from the manifest or the disk.
  EmbeddingSequence Mfcc(const UtteranceRecord& r) const;
  EmbeddingBundle Bundle(const UtteranceRecord& r) const;

  EmbeddingSequence Sequence(const UtteranceRecord& r, const FeatureSpec& spec) const;
  PooledVector Pooled(const UtteranceRecord& r, const FeatureSpec& spec) const;

 private:
  MfccExtractor mfcc_;
};

EmbeddingSequence SequenceFrom(const FeatureSpec& spec, const EmbeddingBundle* bundle,
                               const EmbeddingSequence* mfcc);
PooledVector PooledFrom(const FeatureSpec& spec, const EmbeddingBundle* bundle,
                        const EmbeddingSequence* mfcc);

// Utterance-level extraction runs in parallel; the first failing record (in
// manifest order) is reported.
nnet::Dataset SequenceDataset(const std::vector<const UtteranceRecord*>& records,
                              const FeatureSpec& spec, const FeatureExtractor& fx);
classic::FeatureMatrix PooledDataset(const std::vector<const UtteranceRecord*>& records,
                                     const FeatureSpec& spec, const FeatureExtractor& fx);
nnet::Dataset ToDataset(const classic::FeatureMatrix& m);

// Files read by `spec` for these records, in manifest order.
std::vector<std::filesystem::path> FeatureInputs(
    const std::vector<const UtteranceRecord*>& records, const FeatureSpec& spec);

// Runs fn(i) for i in [0, n) on the OpenMP pool and rethrows the exception of
// the lowest failing index, so errors do not depend on scheduling.
template <typename Fn>
void ParallelForEach(std::size_t n, Fn&& fn);

}  // namespace stutter::experiments

#include "stutter/experiments/parallel_inl.hpp"
