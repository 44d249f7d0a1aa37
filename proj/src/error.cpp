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

#include "stutter/error.hpp"

namespace stutter {

const char* ToString(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownLabel: return "UnknownLabel";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kMissingFile: return "MissingFile";
    case ErrorCode::kBadManifest: return "BadManifest";
    case ErrorCode::kEmptySplit: return "EmptySplit";
    case ErrorCode::kZeroClassCount: return "ZeroClassCount";
    case ErrorCode::kBadWav: return "BadWav";
    case ErrorCode::kChannelCount: return "ChannelCount";
    case ErrorCode::kTooShort: return "TooShort";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kTruncated: return "Truncated";
    case ErrorCode::kBadShape: return "BadShape";
    case ErrorCode::kEmptySequence: return "EmptySequence";
    case ErrorCode::kFrameCountMismatch: return "FrameCountMismatch";
    case ErrorCode::kEmptyIndexSet: return "EmptyIndexSet";
    case ErrorCode::kContextTooShort: return "ContextTooShort";
    case ErrorCode::kNonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::kZeroNorm: return "ZeroNorm";
    case ErrorCode::kNonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::kUnfitted: return "Unfitted";
    case ErrorCode::kClassAbsent: return "ClassAbsent";
    case ErrorCode::kSingleClass: return "SingleClass";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kEmptyMatrix: return "EmptyMatrix";
    case ErrorCode::kBadConfig: return "BadConfig";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace stutter
