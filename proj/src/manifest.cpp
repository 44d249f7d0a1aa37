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

#include "stutter/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "stutter/error.hpp"
#include "stutter/io_util.hpp"

namespace stutter {
namespace fs = std::filesystem;

DatasetManifest::DatasetManifest(std::vector<UtteranceRecord> records)
    : records_(std::move(records)) {
  std::set<std::string> seen;
  for (const auto& r : records_) {
    if (r.id.empty()) throw Error(ErrorCode::kBadManifest, "empty id");
    if (!seen.insert(r.id).second) throw Error(ErrorCode::kDuplicateId, r.id);
    if (!r.audio_path && !r.embedding_path) {
      throw Error(ErrorCode::kBadManifest,
                  "record '" + r.id + "' has neither audio nor embedding path");
    }
  }
}

ClassCounts DatasetManifest::class_counts(Split split) const {
  ClassCounts counts{};
  for (const auto& r : records_) {
    if (r.split == split) ++counts[LabelId(r.label)];
  }
  return counts;
}

std::size_t DatasetManifest::split_size(Split split) const {
  return static_cast<std::size_t>(
      std::count_if(records_.begin(), records_.end(),
                    [split](const auto& r) { return r.split == split; }));
}

std::vector<const UtteranceRecord*> DatasetManifest::split_records(
    Split split) const {
  std::vector<const UtteranceRecord*> out;
  for (const auto& r : records_) {
    if (r.split == split) out.push_back(&r);
  }
  return out;
}

void DatasetManifest::RequireNonEmpty(Split split) const {
  if (split_size(split) == 0) {
    throw Error(ErrorCode::kEmptySplit, std::string(SplitName(split)));
  }
}

DatasetManifest LoadManifest(const fs::path& path, bool check_files) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open manifest " + path.string());
  const fs::path base = path.parent_path();

  std::string line;
  if (!std::getline(in, line) || TrimCopy(line) != kManifestHeader) {
    throw Error(ErrorCode::kBadManifest,
                "expected header '" + std::string(kManifestHeader) + "'");
  }

  auto resolve = [&](const std::string& field) -> std::optional<fs::path> {
    if (field.empty()) return std::nullopt;
    fs::path p(field);
    if (p.is_relative()) p = base / p;
    if (check_files && !fs::exists(p)) {
      throw Error(ErrorCode::kMissingFile, p.string());
    }
    return p;
  };

  std::vector<UtteranceRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (TrimCopy(line).empty()) continue;
    auto fields = SplitCsvLine(TrimCopy(line));
    if (fields.size() != 5) {
      throw Error(ErrorCode::kBadManifest,
                  "line " + std::to_string(line_no) + ": expected 5 fields");
    }
    UtteranceRecord r;
    r.id = fields[0];
    r.audio_path = resolve(fields[1]);
    r.embedding_path = resolve(fields[2]);
    r.label = ParseLabel(fields[3]);
    r.split = ParseSplit(fields[4]);
    records.push_back(std::move(r));
  }
  return DatasetManifest(std::move(records));
}

void WriteManifest(const DatasetManifest& manifest, const fs::path& path) {
  const fs::path base = fs::absolute(path).parent_path();
  auto render = [&](const std::optional<fs::path>& p) -> std::string {
    if (!p) return "";
    fs::path abs = fs::absolute(*p);
    auto rel = abs.lexically_relative(base);
    if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
    return abs.generic_string();
  };
  std::ostringstream out;
  out << kManifestHeader << '\n';
  for (const auto& r : manifest.records()) {
    out << r.id << ',' << render(r.audio_path) << ','
        << render(r.embedding_path) << ',' << LabelName(r.label) << ','
        << SplitName(r.split) << '\n';
  }
  WriteFileAtomic(path, out.str());
}

std::vector<double> ClassWeights(std::span<const std::size_t> counts) {
  const double n = std::accumulate(counts.begin(), counts.end(), 0.0);
  const double c = static_cast<double>(counts.size());
  std::vector<double> weights(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0) {
      throw Error(ErrorCode::kZeroClassCount, "class " + std::to_string(i));
    }
    weights[i] = n / (c * static_cast<double>(counts[i]));
  }
  return weights;
}

std::vector<double> ClassWeights(const DatasetManifest& manifest, Split split) {
  manifest.RequireNonEmpty(split);
  auto counts = manifest.class_counts(split);
  return ClassWeights(std::span<const std::size_t>(counts));
}

}  // namespace stutter
