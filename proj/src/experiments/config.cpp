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

#include "stutter/experiments/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

#include "stutter/classic.hpp"
#include "stutter/error.hpp"
#include "stutter/io_util.hpp"

namespace stutter::experiments {
namespace {

[[noreturn]] void Bad(const std::string& key, const std::string& value, const char* want) {
  throw Error(ErrorCode::kBadConfig, key + " = '" + value + "' is not " + want);
}

template <typename T>
T ParseNumber(const std::string& key, const std::string& value, const char* want) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) Bad(key, value, want);
  return out;
}

std::string Lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string HashOf(const KeyValues& kv) {
  std::string canon;
  for (const auto& [k, v] : kv.values()) canon += k + "=" + v + "\n";
  return Sha256Hex(canon);
}

std::string JoinList(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

Split SplitKey(const KeyValues& kv, const std::string& key, Split fallback) {
  const std::string v = kv.String(key, std::string(SplitName(fallback)));
  try {
    return ParseSplit(v);
  } catch (const Error&) {
    Bad(key, v, "a split name");
  }
}

}  // namespace

KeyValues KeyValues::Parse(std::string_view text) {
  KeyValues kv;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = TrimCopy(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::kBadConfig, "line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = TrimCopy(std::string_view(t).substr(0, eq));
    const std::string value = TrimCopy(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw Error(ErrorCode::kBadConfig, "line " + std::to_string(lineno) + ": empty key");
    if (kv.Has(key)) throw Error(ErrorCode::kBadConfig, "duplicate key '" + key + "'");
    kv.values_[key] = value;
  }
  return kv;
}

KeyValues KeyValues::Load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    throw Error(ErrorCode::kMissingFile, path.string());
  return Parse(ReadFileString(path));
}

std::string KeyValues::String(const std::string& key, const std::string& fallback) const {
  used_.insert(key);
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::int64_t KeyValues::Int(const std::string& key, std::int64_t fallback) const {
  used_.insert(key);
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : ParseNumber<std::int64_t>(key, it->second, "an integer");
}

std::uint64_t KeyValues::Uint(const std::string& key, std::uint64_t fallback) const {
  used_.insert(key);
  const auto it = values_.find(key);
  return it == values_.end() ? fallback
                             : ParseNumber<std::uint64_t>(key, it->second, "a non-negative integer");
}

double KeyValues::Double(const std::string& key, double fallback) const {
  used_.insert(key);
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : ParseNumber<double>(key, it->second, "a number");
}

bool KeyValues::Bool(const std::string& key, bool fallback) const {
  used_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string v = Lower(it->second);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  Bad(key, it->second, "a boolean");
}

std::vector<std::size_t> KeyValues::Sizes(const std::string& key,
                                          const std::vector<std::size_t>& fallback) const {
  used_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<std::size_t> out;
  if (it->second.empty()) return out;
  for (const auto& part : SplitCsvLine(it->second))
    out.push_back(ParseNumber<std::size_t>(key, TrimCopy(part), "a list of integers"));
  return out;
}

std::vector<std::string> KeyValues::List(const std::string& key,
                                         const std::vector<std::string>& fallback) const {
  used_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<std::string> out;
  if (it->second.empty()) return out;
  for (const auto& part : SplitCsvLine(it->second)) out.push_back(TrimCopy(part));
  return out;
}

void KeyValues::RejectUnknown() const {
  for (const auto& [k, v] : values_)
    if (!used_.count(k)) throw Error(ErrorCode::kBadConfig, "unknown config key '" + k + "'");
}

std::string JoinSizes(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

std::string ConfigHash(KeyValues kv) {
  // The output location does not influence results.
  if (kv.Has("out")) kv.Set("out", "");
  return HashOf(kv);
}

bool IsSequenceModel(const std::string& model) {
  return model == "sb-stutternet" || model == "mb-stutternet";
}

bool IsNeuralModel(const std::string& model) {
  return IsSequenceModel(model) || model == "shallow-mb";
}

// ----- RunConfig -----

RunConfig RunConfig::FromKeyValues(const KeyValues& kv) {
  RunConfig c;
  c.manifest = kv.String("manifest", "");
  c.features = kv.String("features", c.features);
  c.model = kv.String("model", c.model);
  c.loss = kv.String("loss", c.loss);
  c.disfluent_target = kv.String("disfluent_target", c.disfluent_target);
  c.train_split = SplitKey(kv, "train_split", c.train_split);
  c.eval_split = SplitKey(kv, "eval_split", c.eval_split);
  c.out = kv.String("out", c.out.string());
  c.seed = kv.Uint("seed", c.seed);
  c.lr = kv.Double("lr", c.lr);
  c.batch_size = kv.Uint("batch_size", c.batch_size);
  c.max_epochs = kv.Uint("max_epochs", c.max_epochs);
  c.patience = kv.Uint("patience", c.patience);
  c.channels = kv.Uint("channels", c.channels);
  c.fc_hidden = kv.Sizes("fc_hidden", c.fc_hidden);
  c.hidden = kv.Sizes("hidden", c.hidden);
  c.dropout = kv.Double("dropout", c.dropout);
  c.standardize = kv.Bool("standardize", c.standardize);
  c.knn_k = kv.Uint("knn_k", c.knn_k);
  c.svm_c = kv.Double("svm_c", c.svm_c);
  c.svm_epochs = kv.Uint("svm_epochs", c.svm_epochs);
  c.gnb_var_smoothing = kv.Double("gnb_var_smoothing", c.gnb_var_smoothing);
  kv.RejectUnknown();
  c.Validate();
  return c;
}

KeyValues RunConfig::ToKeyValues() const {
  KeyValues kv;
  kv.Set("manifest", manifest.string());
  kv.Set("features", features);
  kv.Set("model", model);
  kv.Set("loss", loss);
  kv.Set("disfluent_target", disfluent_target);
  kv.Set("train_split", std::string(SplitName(train_split)));
  kv.Set("eval_split", std::string(SplitName(eval_split)));
  kv.Set("out", out.string());
  kv.Set("seed", std::to_string(seed));
  kv.Set("lr", FormatDouble(lr));
  kv.Set("batch_size", std::to_string(batch_size));
  kv.Set("max_epochs", std::to_string(max_epochs));
  kv.Set("patience", std::to_string(patience));
  kv.Set("channels", std::to_string(channels));
  kv.Set("fc_hidden", JoinSizes(fc_hidden));
  kv.Set("hidden", JoinSizes(hidden));
  kv.Set("dropout", FormatDouble(dropout));
  kv.Set("standardize", standardize ? "true" : "false");
  kv.Set("knn_k", std::to_string(knn_k));
  kv.Set("svm_c", FormatDouble(svm_c));
  kv.Set("svm_epochs", std::to_string(svm_epochs));
  kv.Set("gnb_var_smoothing", FormatDouble(gnb_var_smoothing));
  return kv;
}

std::string RunConfig::Hash() const { return ConfigHash(ToKeyValues()); }

void RunConfig::Validate() const {
  if (manifest.empty()) throw Error(ErrorCode::kBadConfig, "manifest is required");
  const bool neural = IsNeuralModel(model);
  if (!neural && !classic::IsClassicKind(model))
    throw Error(ErrorCode::kBadConfig, "unknown model '" + model + "'");
  if (loss != "ce" && loss != "wce" && loss != "joint")
    throw Error(ErrorCode::kBadConfig, "loss must be ce, wce or joint");
  if (disfluent_target != "masked" && disfluent_target != "all")
    throw Error(ErrorCode::kBadConfig, "disfluent_target must be masked or all");
  if (model == "sb-stutternet" && loss == "joint")
    throw Error(ErrorCode::kBadConfig, "the joint loss needs a multi-branch model");
  if (!neural && loss != "ce")
    throw Error(ErrorCode::kBadConfig, "loss '" + loss + "' does not apply to " + model);
  if (batch_size == 0) throw Error(ErrorCode::kBadConfig, "batch_size must be >= 1");
  if (patience == 0) throw Error(ErrorCode::kBadConfig, "patience must be >= 1");
  if (max_epochs == 0) throw Error(ErrorCode::kBadConfig, "max_epochs must be >= 1");
  if (!(lr > 0.0)) throw Error(ErrorCode::kBadConfig, "lr must be > 0");
  if (channels == 0) throw Error(ErrorCode::kBadConfig, "channels must be >= 1");
  if (dropout < 0.0 || dropout >= 1.0) throw Error(ErrorCode::kBadConfig, "dropout must be in [0, 1)");
  if (std::find(fc_hidden.begin(), fc_hidden.end(), 0u) != fc_hidden.end() ||
      std::find(hidden.begin(), hidden.end(), 0u) != hidden.end())
    throw Error(ErrorCode::kBadConfig, "hidden widths must be >= 1");
  if (knn_k == 0) throw Error(ErrorCode::kBadConfig, "knn_k must be >= 1");
  if (!(svm_c > 0.0) || svm_epochs == 0)
    throw Error(ErrorCode::kBadConfig, "svm_c must be > 0 and svm_epochs >= 1");
  if (train_split == eval_split)
    throw Error(ErrorCode::kBadConfig, "train_split and eval_split must differ");
}

// ----- SweepConfig -----

SweepConfig SweepConfig::FromKeyValues(const KeyValues& kv) {
  SweepConfig c;
  c.manifest = kv.String("manifest", "");
  if (Lower(kv.String("layers", "all")) != "all") c.layers = kv.Sizes("layers", {});
  c.classifiers = kv.List("classifiers", c.classifiers);
  c.variants = kv.List("variants", c.variants);
  c.train_split = SplitKey(kv, "train_split", c.train_split);
  c.eval_split = SplitKey(kv, "eval_split", c.eval_split);
  c.out = kv.String("out", c.out.string());
  c.seed = kv.Uint("seed", c.seed);
  c.standardize = kv.Bool("standardize", c.standardize);
  c.knn_k = kv.Uint("knn_k", c.knn_k);
  c.svm_c = kv.Double("svm_c", c.svm_c);
  c.svm_epochs = kv.Uint("svm_epochs", c.svm_epochs);
  c.gnb_var_smoothing = kv.Double("gnb_var_smoothing", c.gnb_var_smoothing);
  kv.RejectUnknown();
  if (c.manifest.empty()) throw Error(ErrorCode::kBadConfig, "manifest is required");
  if (c.classifiers.empty()) throw Error(ErrorCode::kBadConfig, "classifiers is empty");
  for (const auto& k : c.classifiers)
    if (!classic::IsClassicKind(k))
      throw Error(ErrorCode::kBadConfig, "sweep classifier '" + k + "' is not svm, knn or gnb");
  if (c.variants.empty()) throw Error(ErrorCode::kBadConfig, "variants is empty");
  for (const auto& v : c.variants)
    if (v != "layer" && v != "mfcc+layer")
      throw Error(ErrorCode::kBadConfig, "variant '" + v + "' is not layer or mfcc+layer");
  return c;
}

KeyValues SweepConfig::ToKeyValues() const {
  KeyValues kv;
  kv.Set("manifest", manifest.string());
  kv.Set("layers", layers.empty() ? "all" : JoinSizes(layers));
  kv.Set("classifiers", JoinList(classifiers));
  kv.Set("variants", JoinList(variants));
  kv.Set("train_split", std::string(SplitName(train_split)));
  kv.Set("eval_split", std::string(SplitName(eval_split)));
  kv.Set("out", out.string());
  kv.Set("seed", std::to_string(seed));
  kv.Set("standardize", standardize ? "true" : "false");
  kv.Set("knn_k", std::to_string(knn_k));
  kv.Set("svm_c", FormatDouble(svm_c));
  kv.Set("svm_epochs", std::to_string(svm_epochs));
  kv.Set("gnb_var_smoothing", FormatDouble(gnb_var_smoothing));
  return kv;
}

std::string SweepConfig::Hash() const { return ConfigHash(ToKeyValues()); }

}  // namespace stutter::experiments
