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

#include "stutter/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"
#include "stutter/error.hpp"
#include "stutter/io_util.hpp"

namespace stutter::eval {

std::size_t ConfusionMatrix::row_sum(std::size_t ref) const {
  std::size_t s = 0;
  for (std::size_t p = 0; p < classes_; ++p) s += at(ref, p);
  return s;
}

std::size_t ConfusionMatrix::total() const {
  std::size_t s = 0;
  for (auto c : counts_) s += c;
  return s;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t s = 0;
  for (std::size_t c = 0; c < classes_; ++c) s += at(c, c);
  return s;
}

ConfusionMatrix Confusion(std::span<const int> ref, std::span<const int> pred,
                          std::size_t classes) {
  if (ref.size() != pred.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(ref.size()) + " references vs " + std::to_string(pred.size()) +
                    " predictions");
  }
  if (ref.empty()) throw Error(ErrorCode::kEmptyMatrix, "no scored samples");
  ConfusionMatrix cm(classes);
  for (std::size_t i = 0; i < ref.size(); ++i) {
    if (ref[i] < 0 || pred[i] < 0 || static_cast<std::size_t>(ref[i]) >= classes ||
        static_cast<std::size_t>(pred[i]) >= classes) {
      throw Error(ErrorCode::kUnknownLabel, "class id out of range at " + std::to_string(i));
    }
    ++cm.at(static_cast<std::size_t>(ref[i]), static_cast<std::size_t>(pred[i]));
  }
  return cm;
}

MetricsReport ComputeMetrics(const ConfusionMatrix& cm) {
  const std::size_t total = cm.total();
  if (total == 0) throw Error(ErrorCode::kEmptyMatrix, "confusion matrix is empty");
  MetricsReport r;
  r.n = total;
  r.per_class_recall.assign(cm.classes(), 0.0);
  double sum = 0.0;
  std::size_t included = 0;
  for (std::size_t c = 0; c < cm.classes(); ++c) {
    const std::size_t support = cm.row_sum(c);
    if (support == 0) {
      r.excluded_classes.push_back(static_cast<int>(c));
      const std::string name = cm.classes() == kNumClasses
                                   ? std::string(LabelName(LabelFromId(static_cast<int>(c))))
                                   : std::to_string(c);
      r.warnings.push_back("class " + name + " has no reference samples; excluded from UAR");
      continue;
    }
    r.per_class_recall[c] = static_cast<double>(cm.at(c, c)) / static_cast<double>(support);
    sum += r.per_class_recall[c];
    ++included;
  }
  r.uar = sum / static_cast<double>(included);
  r.total_accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);
  return r;
}

double UarFromRecallPercents(std::span<const double> recalls_percent) {
  if (recalls_percent.empty()) throw Error(ErrorCode::kEmptyMatrix, "no recalls");
  double sum = 0.0;
  for (double r : recalls_percent) sum += r / 100.0;
  return sum / static_cast<double>(recalls_percent.size());
}

std::string FormatPercent1(double percent) {
  const double rounded = std::floor(percent * 10.0 + 0.5) / 10.0;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", rounded);
  return buf;
}

std::string SummaryRow(const MetricsReport& report) {
  std::ostringstream out;
  char buf[32];
  for (std::size_t c = 0; c < report.per_class_recall.size(); ++c) {
    const bool excluded = std::find(report.excluded_classes.begin(),
                                    report.excluded_classes.end(),
                                    static_cast<int>(c)) != report.excluded_classes.end();
    if (report.per_class_recall.size() == kNumClasses) {
      out << LabelAbbrev(LabelFromId(static_cast<int>(c)));
    } else {
      out << c;
    }
    if (excluded) {
      out << " NA | ";
    } else {
      std::snprintf(buf, sizeof(buf), " %.2f | ", 100.0 * report.per_class_recall[c]);
      out << buf;
    }
  }
  std::snprintf(buf, sizeof(buf), "TA %.2f | ", 100.0 * report.total_accuracy);
  out << buf << "UAR " << FormatPercent1(100.0 * report.uar);
  return out.str();
}

std::string MetricsToJson(const MetricsReport& report, const ConfusionMatrix& cm) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json recalls = nlohmann::ordered_json::object();
  for (std::size_t c = 0; c < report.per_class_recall.size(); ++c) {
    const std::string key = report.per_class_recall.size() == kNumClasses
                                ? std::string(LabelName(LabelFromId(static_cast<int>(c))))
                                : std::to_string(c);
    const bool excluded = std::find(report.excluded_classes.begin(),
                                    report.excluded_classes.end(),
                                    static_cast<int>(c)) != report.excluded_classes.end();
    recalls[key] = excluded ? nlohmann::ordered_json(nullptr)
                            : nlohmann::ordered_json(report.per_class_recall[c]);
  }
  j["per_class_recall"] = recalls;
  j["uar"] = report.uar;
  j["total_accuracy"] = report.total_accuracy;
  j["n"] = report.n;
  j["excluded_classes"] = report.excluded_classes;
  j["warnings"] = report.warnings;
  std::vector<std::vector<std::size_t>> rows(cm.classes());
  for (std::size_t r = 0; r < cm.classes(); ++r)
    for (std::size_t p = 0; p < cm.classes(); ++p) rows[r].push_back(cm.at(r, p));
  j["confusion"] = rows;
  return j.dump(2) + "\n";
}

MetricsReport MetricsFromJson(const std::string& text) {
  const auto j = nlohmann::ordered_json::parse(text);
  MetricsReport r;
  for (const auto& [key, value] : j.at("per_class_recall").items()) {
    r.per_class_recall.push_back(value.is_null() ? 0.0 : value.get<double>());
  }
  r.uar = j.at("uar").get<double>();
  r.total_accuracy = j.at("total_accuracy").get<double>();
  r.n = j.at("n").get<std::size_t>();
  r.excluded_classes = j.at("excluded_classes").get<std::vector<int>>();
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
  return r;
}

std::string ConfusionToCsv(const ConfusionMatrix& cm) {
  auto name = [&](std::size_t c) {
    return cm.classes() == kNumClasses
               ? std::string(LabelName(LabelFromId(static_cast<int>(c))))
               : std::to_string(c);
  };
  std::ostringstream out;
  out << "reference\\predicted";
  for (std::size_t c = 0; c < cm.classes(); ++c) out << ',' << name(c);
  out << '\n';
  for (std::size_t r = 0; r < cm.classes(); ++r) {
    out << name(r);
    for (std::size_t p = 0; p < cm.classes(); ++p) out << ',' << cm.at(r, p);
    out << '\n';
  }
  return out.str();
}

void EmitReport(const MetricsReport& report, const ConfusionMatrix& cm,
                const std::filesystem::path& dir, const std::string& tag) {
  WriteFileAtomic(dir / "metrics.json", MetricsToJson(report, cm));
  WriteFileAtomic(dir / "confusion.csv", ConfusionToCsv(cm));
  std::string summary;
  if (!tag.empty()) summary += tag + "\n";
  summary += SummaryRow(report) + "\n";
  WriteFileAtomic(dir / "summary.txt", summary);
}

}  // namespace stutter::eval
