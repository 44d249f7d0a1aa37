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

#include "stutter/labels.hpp"

#include <algorithm>
#include <cctype>

#include "stutter/error.hpp"

namespace stutter {
namespace {

constexpr std::array<std::string_view, kNumClasses> kNames = {
    "Garbage", "Fillers",  "Prolongation",   "SoundRepetition",
    "Block",   "Modified", "WordRepetition", "NoDisfluency"};

constexpr std::array<std::string_view, kNumClasses> kAbbrevs = {
    "G", "Fi", "P", "SR", "B", "M", "WR", "ND"};

bool EqualsIgnoreCase(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

std::string_view LabelName(Label label) { return kNames.at(LabelId(label)); }

std::string_view LabelAbbrev(Label label) {
  return kAbbrevs.at(LabelId(label));
}

Label ParseLabel(std::string_view name) {
  for (int i = 0; i < kNumClasses; ++i) {
    if (EqualsIgnoreCase(name, kNames[i])) return static_cast<Label>(i);
  }
  throw Error(ErrorCode::kUnknownLabel, std::string(name));
}

Label LabelFromId(int id) {
  if (id < 0 || id >= kNumClasses) {
    throw Error(ErrorCode::kUnknownLabel, std::to_string(id));
  }
  return static_cast<Label>(id);
}

std::string_view SplitName(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    case Split::kTest: return "test";
  }
  return "train";
}

Split ParseSplit(std::string_view name) {
  if (EqualsIgnoreCase(name, "train")) return Split::kTrain;
  if (EqualsIgnoreCase(name, "validation") || EqualsIgnoreCase(name, "val") ||
      EqualsIgnoreCase(name, "devel")) {
    return Split::kValidation;
  }
  if (EqualsIgnoreCase(name, "test")) return Split::kTest;
  throw Error(ErrorCode::kBadManifest, "unknown split '" + std::string(name) + "'");
}

}  // namespace stutter
