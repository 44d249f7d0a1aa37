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

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

namespace stutter {

std::string TrimCopy(std::string_view s);
std::vector<std::string> SplitCsvLine(std::string_view line, char sep = ',');

std::string ReadFileString(const std::filesystem::path& path);

// Writes to a sibling temp file and renames over the target, so readers see
// either the old or the new contents.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view bytes);

std::string Sha256Hex(std::string_view bytes);

// Shortest decimal form that parses back to the same double.
std::string FormatDouble(double v);

// Little-endian encoding, independent of host byte order.
template <typename T>
void AppendLE(std::string& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::uint8_t raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = sizeof(T); i-- > 0;) out.push_back(static_cast<char>(raw[i]));
  } else {
    out.append(reinterpret_cast<const char*>(raw), sizeof(T));
  }
}

template <typename T>
T ReadLE(const char* p) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::uint8_t raw[sizeof(T)];
  std::memcpy(raw, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(raw[i], raw[sizeof(T) - 1 - i]);
  }
  T value;
  std::memcpy(&value, raw, sizeof(T));
  return value;
}

}  // namespace stutter
