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

#include <stdexcept>
#include <string>

namespace stutter {

enum class ErrorCode {
  kUnknownLabel,
  kDuplicateId,
  kMissingFile,
  kBadManifest,
  kEmptySplit,
  kZeroClassCount,
  kBadWav,
  kChannelCount,
  kTooShort,
  kBadMagic,
  kTruncated,
  kBadShape,
  kEmptySequence,
  kFrameCountMismatch,
  kEmptyIndexSet,
  kContextTooShort,
  kNonPositiveWeight,
  kZeroNorm,
  kNonFiniteGradient,
  kUnfitted,
  kClassAbsent,
  kSingleClass,
  kLengthMismatch,
  kEmptyMatrix,
  kBadConfig,
  kIo,
};

const char* ToString(ErrorCode code);

// Data and contract errors raised by the library. The CLI maps these to exit
// code 2; argument errors are handled separately.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(ToString(code)) + "(" + detail + ")"),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const { return code_; }
  const std::string& detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace stutter
