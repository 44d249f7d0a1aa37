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

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "stutter/labels.hpp"

namespace stutter::eval {

// Rows are reference classes, columns predictions.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes = kNumClasses)
      : classes_(classes), counts_(classes * classes, 0) {}

  std::size_t classes() const { return classes_; }
  std::size_t& at(std::size_t ref, std::size_t pred) { return counts_[ref * classes_ + pred]; }
  std::size_t at(std::size_t ref, std::size_t pred) const {
    return counts_[ref * classes_ + pred];
  }
  std::size_t row_sum(std::size_t ref) const;
  std::size_t total() const;
  std::size_t trace() const;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t classes_;
  std::vector<std::size_t> counts_;
};

// Throws Error(kLengthMismatch) on unequal lengths, Error(kEmptyMatrix) on
// empty input.
ConfusionMatrix Confusion(std::span<const int> ref, std::span<const int> pred,
                          std::size_t classes = kNumClasses);

struct MetricsReport {
  // Fractions in [0, 1]; excluded classes hold 0 and are listed below.
  std::vector<double> per_class_recall;
  double uar = 0.0;             // fraction
  double total_accuracy = 0.0;  // fraction
  std::size_t n = 0;
  std::vector<int> excluded_classes;
  std::vector<std::string> warnings;

  bool operator==(const MetricsReport&) const = default;
};

// Recall per class = diagonal / row sum. Classes with an empty row are
// excluded from the UAR mean (with a warning) rather than counted as zero.
MetricsReport ComputeMetrics(const ConfusionMatrix& cm);

// UAR as a fraction from per-class recalls given in percent.
double UarFromRecallPercents(std::span<const double> recalls_percent);

// Rounds half-up to one decimal, e.g. 36.94375 -> "36.9".
std::string FormatPercent1(double percent);

// "G 9.09 | Fi 69.61 | ... | TA 53.82 | UAR 36.9"
std::string SummaryRow(const MetricsReport& report);

std::string MetricsToJson(const MetricsReport& report, const ConfusionMatrix& cm);
MetricsReport MetricsFromJson(const std::string& json);
std::string ConfusionToCsv(const ConfusionMatrix& cm);

// Writes <dir>/metrics.json, <dir>/confusion.csv and <dir>/summary.txt.
void EmitReport(const MetricsReport& report, const ConfusionMatrix& cm,
                const std::filesystem::path& dir, const std::string& tag = "");

}  // namespace stutter::eval
