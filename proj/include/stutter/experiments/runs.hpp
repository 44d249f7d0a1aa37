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
#include <optional>
#include <string>
#include <vector>

#include "stutter/eval.hpp"
#include "stutter/experiments/config.hpp"
#include "stutter/manifest.hpp"
#include "stutter/nnet/trainer.hpp"

namespace stutter::experiments {

struct TrainResult {
  eval::MetricsReport report;
  eval::ConfusionMatrix confusion;
  std::optional<nnet::TrainHistory> history;  // neural models only
};

// Fits the configured model on train_split, scores eval_split and writes
// into cfg.out: metrics.json, confusion.csv, summary.txt, predictions.csv,
// model.ckpt, history.csv (neural models) and run-manifest.json.
TrainResult RunTrain(const RunConfig& cfg);

struct Predictions {
  std::vector<std::string> ids;
  std::vector<int> labels;
};

// Scores one split of a manifest with a saved model (neural or classic).
Predictions RunPredict(const std::filesystem::path& model_path,
                       const std::filesystem::path& manifest_path, Split split);

// "id,predicted_label" with label names.
std::string PredictionsCsv(const Predictions& p);
void WritePredictions(const Predictions& p, const std::filesystem::path& path);

struct EvaluateResult {
  eval::MetricsReport report;
  eval::ConfusionMatrix confusion;
};

// `ref` needs id and label columns (a manifest qualifies); `pred` needs id
// and predicted_label (or label) columns. Every reference id must have a
// prediction. Rows of `ref` can be limited to one split when it has a split
// column.
EvaluateResult RunEvaluate(const std::filesystem::path& ref, const std::filesystem::path& pred,
                           std::optional<Split> split = std::nullopt);

struct SweepRow {
  std::size_t layer = 0;
  std::string variant;
  std::string classifier;
  double uar = 0.0;  // fraction
};

// One row per (layer, variant, classifier), in that nesting order. Writes
// <out>/sweep.csv and <out>/run-manifest.json.
std::vector<SweepRow> RunLayerSweep(const SweepConfig& cfg);
std::string SweepCsv(const std::vector<SweepRow>& rows);
// Layer with the highest UAR for `classifier` (first on ties).
std::size_t BestLayer(const std::vector<SweepRow>& rows, const std::string& classifier,
                      const std::string& variant = "layer");

// run-manifest.json: command, resolved config, config hash, seed, and
// SHA-256 digests of the input and output files.
void WriteRunManifest(const std::filesystem::path& dir, const std::string& command,
                      const KeyValues& config, const std::string& config_hash,
                      std::uint64_t seed, const std::vector<std::filesystem::path>& inputs,
                      const std::vector<std::filesystem::path>& outputs);

}  // namespace stutter::experiments
