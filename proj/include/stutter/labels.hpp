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
#include <string>
#include <string_view>

namespace stutter {

// The eight disfluency categories. Ids are fixed; NoDisfluency is the only
// fluent class.
enum class Label : int {
  kGarbage = 0,
  kFillers = 1,
  kProlongation = 2,
  kSoundRepetition = 3,
  kBlock = 4,
  kModified = 5,
  kWordRepetition = 6,
  kNoDisfluency = 7,
};

inline constexpr int kNumClasses = 8;
inline constexpr int kNumDisfluentClasses = 7;

// Fluent-branch targets.
inline constexpr int kFluentIndex = 0;
inline constexpr int kDisfluentIndex = 1;

std::string_view LabelName(Label label);
// Case-insensitive. Throws Error(kUnknownLabel) on anything else.
Label ParseLabel(std::string_view name);
Label LabelFromId(int id);
inline int LabelId(Label label) { return static_cast<int>(label); }

inline bool IsFluent(Label label) { return label == Label::kNoDisfluency; }
inline bool IsFluent(int id) { return id == LabelId(Label::kNoDisfluency); }

// Short column names used in table-style reports.
std::string_view LabelAbbrev(Label label);

enum class Split { kTrain, kValidation, kTest };

std::string_view SplitName(Split split);
Split ParseSplit(std::string_view name);

}  // namespace stutter
