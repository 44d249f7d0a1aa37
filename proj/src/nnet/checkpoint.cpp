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

#include "stutter/nnet/checkpoint.hpp"

#include "stutter/error.hpp"
#include "stutter/io_util.hpp"

namespace stutter::nnet {
namespace {

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T Read() {
    Need(sizeof(T));
    T v = ReadLE<T>(bytes_.data() + pos_);
    pos_ += sizeof(T);
    return v;
  }
  std::string ReadString(std::size_t n) {
    Need(n);
    std::string s(bytes_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void Need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw Error(ErrorCode::kTruncated, "checkpoint");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

const NamedTensor& Checkpoint::Get(std::string_view name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t;
  }
  throw Error(ErrorCode::kBadShape, "checkpoint has no tensor '" + std::string(name) + "'");
}

bool Checkpoint::Has(std::string_view name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return true;
  }
  return false;
}

void Checkpoint::Add(std::string name, std::vector<std::uint64_t> shape,
                     std::vector<double> values) {
  tensors.push_back({std::move(name), std::move(shape), std::move(values)});
}

std::string EncodeCheckpoint(const Checkpoint& ckpt) {
  std::string out = "STCK";
  AppendLE<std::uint32_t>(out, kCheckpointVersion);
  AppendLE<std::uint64_t>(out, ckpt.seed);
  AppendLE<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.meta.size()));
  out += ckpt.meta;
  AppendLE<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& t : ckpt.tensors) {
    std::uint64_t count = 1;
    for (auto d : t.shape) count *= d;
    if (count != t.values.size()) {
      throw Error(ErrorCode::kBadShape, "tensor '" + t.name + "' shape/value mismatch");
    }
    AppendLE<std::uint32_t>(out, static_cast<std::uint32_t>(t.name.size()));
    out += t.name;
    AppendLE<std::uint32_t>(out, static_cast<std::uint32_t>(t.shape.size()));
    for (auto d : t.shape) AppendLE<std::uint64_t>(out, d);
    for (double v : t.values) AppendLE<double>(out, v);
  }
  return out;
}

Checkpoint DecodeCheckpoint(std::string_view bytes) {
  if (bytes.substr(0, 4) != "STCK") throw Error(ErrorCode::kBadMagic, "checkpoint");
  Reader r(bytes.substr(4));
  const auto version = r.Read<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kBadShape, "unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ckpt;
  ckpt.seed = r.Read<std::uint64_t>();
  ckpt.meta = r.ReadString(r.Read<std::uint32_t>());
  const auto n = r.Read<std::uint32_t>();
  for (std::uint32_t i = 0; i < n; ++i) {
    NamedTensor t;
    t.name = r.ReadString(r.Read<std::uint32_t>());
    const auto rank = r.Read<std::uint32_t>();
    std::uint64_t count = 1;
    for (std::uint32_t k = 0; k < rank; ++k) {
      t.shape.push_back(r.Read<std::uint64_t>());
      count *= t.shape.back();
    }
    if (count > r.remaining() / sizeof(double)) {
      throw Error(ErrorCode::kTruncated, "tensor '" + t.name + "'");
    }
    t.values.resize(count);
    for (auto& v : t.values) v = r.Read<double>();
    ckpt.tensors.push_back(std::move(t));
  }
  if (!r.done()) throw Error(ErrorCode::kTruncated, "trailing bytes in checkpoint");
  return ckpt;
}

void SaveCheckpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  WriteFileAtomic(path, EncodeCheckpoint(ckpt));
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  return DecodeCheckpoint(ReadFileString(path));
}

}  // namespace stutter::nnet
