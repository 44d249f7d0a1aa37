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

#include "stutter/experiments/features.hpp"

#include <charconv>

#include "stutter/error.hpp"
#include "stutter/io_util.hpp"

namespace stutter::experiments {
namespace {

std::vector<std::size_t> ParseIndices(std::string_view text, std::string_view whole) {
  std::vector<std::size_t> out;
  for (const auto& part : SplitCsvLine(text)) {
    const std::string p = TrimCopy(part);
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(p.data(), p.data() + p.size(), v);
    if (p.empty() || ec != std::errc() || ptr != p.data() + p.size())
      throw Error(ErrorCode::kBadConfig, "bad layer index in feature spec '" + std::string(whole) + "'");
    out.push_back(v);
  }
  return out;
}

const EmbeddingSequence& Layer(const EmbeddingBundle& b, std::size_t k) {
  if (k >= b.num_layers())
    throw Error(ErrorCode::kBadShape, "layer " + std::to_string(k) + " requested from a " +
                                          std::to_string(b.num_layers()) + "-layer bundle");
  return b.layers[k];
}

std::vector<std::size_t> SumIndices(const FeatureSpec& spec, const EmbeddingBundle& b) {
  if (!spec.layers.empty()) return spec.layers;
  std::vector<std::size_t> all(b.num_layers());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return all;
}

}  // namespace

FeatureSpec FeatureSpec::Parse(std::string_view text) {
  const std::string t = TrimCopy(text);
  FeatureSpec s;
  auto rest = [&](std::string_view prefix) { return std::string_view(t).substr(prefix.size()); };
  if (t == "mfcc") {
    s.kind = Kind::kMfcc;
  } else if (t.rfind("mfcc:layer:", 0) == 0) {
    s.kind = Kind::kMfccLayer;
    s.layers = ParseIndices(rest("mfcc:layer:"), t);
  } else if (t.rfind("layer:", 0) == 0) {
    s.kind = Kind::kLayer;
    s.layers = ParseIndices(rest("layer:"), t);
  } else if (t.rfind("concat:", 0) == 0) {
    s.kind = Kind::kConcat;
    s.layers = ParseIndices(rest("concat:"), t);
    if (s.layers.size() < 2)
      throw Error(ErrorCode::kBadConfig, "concat needs at least two layers: '" + t + "'");
  } else if (t.rfind("sum:", 0) == 0) {
    s.kind = Kind::kSum;
    if (rest("sum:") != "all") s.layers = ParseIndices(rest("sum:"), t);
    if (s.layers.empty() && rest("sum:") != "all")
      throw Error(ErrorCode::kBadConfig, "sum needs layer indices or 'all'");
  } else {
    throw Error(ErrorCode::kBadConfig, "unknown feature spec '" + t + "'");
  }
  if ((s.kind == Kind::kLayer || s.kind == Kind::kMfccLayer) && s.layers.size() != 1)
    throw Error(ErrorCode::kBadConfig, "'" + t + "' takes exactly one layer");
  return s;
}

std::string FeatureSpec::ToString() const {
  std::string idx;
  for (std::size_t i = 0; i < layers.size(); ++i) idx += (i ? "," : "") + std::to_string(layers[i]);
  switch (kind) {
    case Kind::kMfcc: return "mfcc";
    case Kind::kLayer: return "layer:" + idx;
    case Kind::kConcat: return "concat:" + idx;
    case Kind::kSum: return "sum:" + (layers.empty() ? std::string("all") : idx);
    case Kind::kMfccLayer: return "mfcc:layer:" + idx;
  }
  return "";
}

EmbeddingSequence FeatureExtractor::Mfcc(const UtteranceRecord& r) const {
  if (!r.audio_path || !std::filesystem::exists(*r.audio_path))
    throw Error(ErrorCode::kMissingFile, "utterance '" + r.id + "' has no audio file");
  try {
    return mfcc_.Compute(ReadWav(*r.audio_path));
  } catch (const Error& e) {
    throw Error(e.code(), "utterance '" + r.id + "': " + e.detail());
  }
}

EmbeddingBundle FeatureExtractor::Bundle(const UtteranceRecord& r) const {
  if (!r.embedding_path || !std::filesystem::exists(*r.embedding_path))
    throw Error(ErrorCode::kMissingFile, "utterance '" + r.id + "' has no embedding bundle");
  try {
    return ReadBundle(*r.embedding_path);
  } catch (const Error& e) {
    throw Error(e.code(), "utterance '" + r.id + "': " + e.detail());
  }
}

EmbeddingSequence SequenceFrom(const FeatureSpec& spec, const EmbeddingBundle* bundle,
                               const EmbeddingSequence* mfcc) {
  using K = FeatureSpec::Kind;
  switch (spec.kind) {
    case K::kMfcc: return *mfcc;
    case K::kLayer: return Layer(*bundle, spec.layers[0]);
    case K::kConcat: {
      EmbeddingSequence acc = Layer(*bundle, spec.layers[0]);
      for (std::size_t i = 1; i < spec.layers.size(); ++i)
        acc = ConcatSequences(acc, Layer(*bundle, spec.layers[i]));
      return acc;
    }
    case K::kSum: {
      const auto idx = SumIndices(spec, *bundle);
      return SumLayers(*bundle, idx);
    }
    case K::kMfccLayer: return ConcatSequences(*mfcc, Layer(*bundle, spec.layers[0]));
  }
  throw Error(ErrorCode::kBadConfig, "unhandled feature kind");
}

PooledVector PooledFrom(const FeatureSpec& spec, const EmbeddingBundle* bundle,
                        const EmbeddingSequence* mfcc) {
  using K = FeatureSpec::Kind;
  switch (spec.kind) {
    case K::kConcat: {
      PooledVector acc = Pool(Layer(*bundle, spec.layers[0]));
      for (std::size_t i = 1; i < spec.layers.size(); ++i)
        acc = ConcatPooled(acc, Pool(Layer(*bundle, spec.layers[i])));
      return acc;
    }
    case K::kMfccLayer: return ConcatPooled(Pool(*mfcc), Pool(Layer(*bundle, spec.layers[0])));
    default: return Pool(SequenceFrom(spec, bundle, mfcc));
  }
}

EmbeddingSequence FeatureExtractor::Sequence(const UtteranceRecord& r,
                                             const FeatureSpec& spec) const {
  EmbeddingBundle bundle;
  EmbeddingSequence mfcc;
  if (spec.needs_bundle()) bundle = Bundle(r);
  if (spec.needs_audio()) mfcc = Mfcc(r);
  try {
    return SequenceFrom(spec, &bundle, &mfcc);
  } catch (const Error& e) {
    throw Error(e.code(), "utterance '" + r.id + "': " + e.detail());
  }
}

PooledVector FeatureExtractor::Pooled(const UtteranceRecord& r, const FeatureSpec& spec) const {
  EmbeddingBundle bundle;
  EmbeddingSequence mfcc;
  if (spec.needs_bundle()) bundle = Bundle(r);
  if (spec.needs_audio()) mfcc = Mfcc(r);
  try {
    return PooledFrom(spec, &bundle, &mfcc);
  } catch (const Error& e) {
    throw Error(e.code(), "utterance '" + r.id + "': " + e.detail());
  }
}

nnet::Dataset SequenceDataset(const std::vector<const UtteranceRecord*>& records,
                              const FeatureSpec& spec, const FeatureExtractor& fx) {
  std::vector<EmbeddingSequence> seqs(records.size());
  ParallelForEach(records.size(), [&](std::size_t i) { seqs[i] = fx.Sequence(*records[i], spec); });
  nnet::Dataset d;
  d.sequence = true;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (i == 0) d.dim = seqs[i].dim();
    if (seqs[i].dim() != d.dim)
      throw Error(ErrorCode::kBadShape, "utterance '" + records[i]->id + "' has feature dim " +
                                            std::to_string(seqs[i].dim()) + ", expected " +
                                            std::to_string(d.dim));
    nnet::Example e;
    e.frames = seqs[i].frames();
    e.values = std::move(seqs[i].data());
    e.label = LabelId(records[i]->label);
    d.examples.push_back(std::move(e));
  }
  return d;
}

classic::FeatureMatrix PooledDataset(const std::vector<const UtteranceRecord*>& records,
                                     const FeatureSpec& spec, const FeatureExtractor& fx) {
  std::vector<PooledVector> pooled(records.size());
  ParallelForEach(records.size(), [&](std::size_t i) { pooled[i] = fx.Pooled(*records[i], spec); });
  classic::FeatureMatrix m;
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      m.Append(pooled[i], LabelId(records[i]->label));
    } catch (const Error& e) {
      throw Error(e.code(), "utterance '" + records[i]->id + "': " + e.detail());
    }
  }
  return m;
}

nnet::Dataset ToDataset(const classic::FeatureMatrix& m) {
  nnet::Dataset d;
  d.dim = m.dim;
  d.sequence = false;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    nnet::Example e;
    e.values.assign(m.row(i), m.row(i) + m.dim);
    e.frames = 1;
    e.label = m.labels.empty() ? 0 : m.labels[i];
    d.examples.push_back(std::move(e));
  }
  return d;
}

std::vector<std::filesystem::path> FeatureInputs(
    const std::vector<const UtteranceRecord*>& records, const FeatureSpec& spec) {
  std::vector<std::filesystem::path> out;
  for (const auto* r : records) {
    if (spec.needs_audio() && r->audio_path) out.push_back(*r->audio_path);
    if (spec.needs_bundle() && r->embedding_path) out.push_back(*r->embedding_path);
  }
  return out;
}

}  // namespace stutter::experiments
