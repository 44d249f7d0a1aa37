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

#include "stutter/experiments/runs.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "stutter/classic.hpp"
#include "stutter/error.hpp"
#include "stutter/experiments/features.hpp"
#include "stutter/io_util.hpp"
#include "stutter/models.hpp"
#include "stutter/nnet/checkpoint.hpp"

namespace stutter::experiments {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr std::size_t kPredictBatch = 128;

classic::ClassicConfig ClassicFrom(bool standardize, std::size_t knn_k, double svm_c,
                                   std::size_t svm_epochs, double smoothing, std::uint64_t seed) {
  classic::ClassicConfig c;
  c.standardize = standardize;
  c.knn_k = knn_k;
  c.svm_c = svm_c;
  c.svm_epochs = svm_epochs;
  c.gnb_var_smoothing = smoothing;
  c.seed = seed;
  return c;
}

std::unique_ptr<models::NeuralModel> BuildNeural(const RunConfig& cfg, std::size_t dim,
                                                 const DatasetManifest& manifest) {
  const bool weighted = cfg.loss == "wce";
  if (cfg.model == "sb-stutternet") {
    auto net = std::make_unique<models::SingleBranchNet>(
        models::StutterNetSpec{cfg.channels, cfg.fc_hidden}, dim, kNumClasses, cfg.seed);
    if (weighted)
      net->SetLoss(models::LossKind::kWeighted, ClassWeights(manifest, cfg.train_split));
    return net;
  }

  const auto target = cfg.disfluent_target == "all" ? nnet::DisfluentTarget::kAllSamples
                                                    : nnet::DisfluentTarget::kMasked;
  auto net = std::make_unique<models::MultiBranchNet>(
      cfg.model == "shallow-mb"
          ? models::MultiBranchNet::Shallow(models::ShallowSpec{cfg.hidden, cfg.dropout}, dim,
                                            cfg.seed, target)
          : models::MultiBranchNet::StutterNet(
                models::StutterNetSpec{cfg.channels, cfg.fc_hidden}, dim, cfg.seed, target));
  nnet::JointLossOptions opts;
  opts.target = target;
  if (weighted) {
    const ClassCounts counts = manifest.class_counts(cfg.train_split);
    const std::size_t fluent = counts[LabelId(Label::kNoDisfluency)];
    std::size_t disfluent = 0;
    for (std::size_t c = 0; c < kNumClasses; ++c)
      if (!IsFluent(static_cast<int>(c))) disfluent += counts[c];
    const std::size_t binary[2] = {fluent, disfluent};  // index 0 = fluent
    opts.fluent_alpha = ClassWeights(binary);
    const std::size_t n_dis = target == nnet::DisfluentTarget::kMasked ? kNumClasses - 1
                                                                        : kNumClasses;
    opts.disfluent_alpha = ClassWeights(std::span<const std::size_t>(counts.data(), n_dis));
  }
  net->SetLossOptions(std::move(opts));
  return net;
}

std::string HistoryCsv(const nnet::TrainHistory& h) {
  std::string out = "epoch,train_loss,val_loss,val_uar\n";
  for (const auto& e : h.epochs)
    out += std::to_string(e.epoch) + "," + FormatDouble(e.train_loss) + "," +
           FormatDouble(e.val_loss) + "," + FormatDouble(e.val_uar) + "\n";
  return out;
}

std::vector<fs::path> Unique(std::vector<fs::path> paths) {
  std::vector<fs::path> out;
  std::set<fs::path> seen;
  for (auto& p : paths)
    if (seen.insert(p).second) out.push_back(std::move(p));
  return out;
}

// Splits a CSV file into a header->column map and data rows.
struct Table {
  std::map<std::string, std::size_t> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t Column(const std::vector<std::string>& names, const fs::path& path) const {
    for (const auto& n : names) {
      auto it = columns.find(n);
      if (it != columns.end()) return it->second;
    }
    throw Error(ErrorCode::kBadManifest, path.string() + ": missing column '" + names[0] + "'");
  }
};

Table ReadTable(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::kMissingFile, path.string());
  std::istringstream in(ReadFileString(path));
  Table t;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (TrimCopy(line).empty()) continue;
    auto cells = SplitCsvLine(line);
    for (auto& c : cells) c = TrimCopy(c);
    if (header) {
      for (std::size_t i = 0; i < cells.size(); ++i) t.columns[cells[i]] = i;
      header = false;
      continue;
    }
    t.rows.push_back(std::move(cells));
  }
  if (header) throw Error(ErrorCode::kBadManifest, path.string() + ": empty file");
  return t;
}

const std::string& Cell(const std::vector<std::string>& row, std::size_t col,
                        const fs::path& path) {
  if (col >= row.size())
    throw Error(ErrorCode::kBadManifest, path.string() + ": short row");
  return row[col];
}

int ParseLabelCell(const std::string& s) {
  if (!s.empty() && std::all_of(s.begin(), s.end(), [](char ch) { return ch >= '0' && ch <= '9'; }))
    return LabelId(LabelFromId(std::stoi(s)));
  return LabelId(ParseLabel(s));
}

}  // namespace

std::string PredictionsCsv(const Predictions& p) {
  std::string out = "id,predicted_label\n";
  for (std::size_t i = 0; i < p.ids.size(); ++i)
    out += p.ids[i] + "," + std::string(LabelName(LabelFromId(p.labels[i]))) + "\n";
  return out;
}

void WritePredictions(const Predictions& p, const fs::path& path) {
  WriteFileAtomic(path, PredictionsCsv(p));
}

void WriteRunManifest(const fs::path& dir, const std::string& command, const KeyValues& config,
                      const std::string& config_hash, std::uint64_t seed,
                      const std::vector<fs::path>& inputs, const std::vector<fs::path>& outputs) {
  json j;
  j["command"] = command;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  json cfg = json::object();
  for (const auto& [k, v] : config.values()) cfg[k] = v;
  j["config"] = cfg;
  auto digests = [](const std::vector<fs::path>& paths, const fs::path& base) {
    json arr = json::array();
    for (const auto& p : paths) {
      const fs::path full = base.empty() ? p : base / p;
      arr.push_back({{"path", p.generic_string()}, {"sha256", Sha256Hex(ReadFileString(full))}});
    }
    return arr;
  };
  j["inputs"] = digests(Unique(inputs), {});
  j["outputs"] = digests(outputs, dir);
  WriteFileAtomic(dir / "run-manifest.json", j.dump(2) + "\n");
}

TrainResult RunTrain(const RunConfig& cfg) {
  cfg.Validate();
  const DatasetManifest manifest = LoadManifest(cfg.manifest);
  manifest.RequireNonEmpty(cfg.train_split);
  manifest.RequireNonEmpty(cfg.eval_split);
  const FeatureSpec spec = FeatureSpec::Parse(cfg.features);
  const FeatureExtractor fx;
  const auto train_recs = manifest.split_records(cfg.train_split);
  const auto eval_recs = manifest.split_records(cfg.eval_split);
  fs::create_directories(cfg.out);

  TrainResult result;
  std::vector<int> ref, pred;
  nnet::Checkpoint ckpt;
  if (IsNeuralModel(cfg.model)) {
    nnet::Dataset train, val;
    if (IsSequenceModel(cfg.model)) {
      train = SequenceDataset(train_recs, spec, fx);
      val = SequenceDataset(eval_recs, spec, fx);
    } else {
      train = ToDataset(PooledDataset(train_recs, spec, fx));
      val = ToDataset(PooledDataset(eval_recs, spec, fx));
    }
    if (val.dim != train.dim)
      throw Error(ErrorCode::kBadShape, "train and eval feature dims differ");
    auto model = BuildNeural(cfg, train.dim, manifest);
    nnet::TrainConfig tc;
    tc.adam.lr = cfg.lr;
    tc.batch_size = cfg.batch_size;
    tc.max_epochs = cfg.max_epochs;
    tc.patience = cfg.patience;
    tc.seed = cfg.seed;
    result.history = nnet::Train(*model, train, val, tc);
    pred = nnet::PredictAll(*model, val, cfg.batch_size);
    ref = val.labels();
    ckpt = model->ToCheckpoint(cfg.seed);
  } else {
    const auto train = PooledDataset(train_recs, spec, fx);
    const auto val = PooledDataset(eval_recs, spec, fx);
    auto clf = classic::MakeClassifier(
        cfg.model, ClassicFrom(cfg.standardize, cfg.knn_k, cfg.svm_c, cfg.svm_epochs,
                               cfg.gnb_var_smoothing, cfg.seed));
    clf->Fit(train);
    pred = clf->Predict(val);
    ref = val.labels;
    ckpt = clf->ToCheckpoint();
    ckpt.seed = cfg.seed;
  }
  json meta = json::parse(ckpt.meta);
  meta["features"] = spec.ToString();
  ckpt.meta = meta.dump();

  result.confusion = eval::Confusion(ref, pred);
  result.report = eval::ComputeMetrics(result.confusion);
  eval::EmitReport(result.report, result.confusion, cfg.out);

  Predictions p;
  for (const auto* r : eval_recs) p.ids.push_back(r->id);
  p.labels = pred;
  WritePredictions(p, cfg.out / "predictions.csv");
  nnet::SaveCheckpoint(ckpt, cfg.out / "model.ckpt");

  std::vector<fs::path> outputs = {"metrics.json", "confusion.csv", "summary.txt",
                                   "predictions.csv", "model.ckpt"};
  if (result.history) {
    WriteFileAtomic(cfg.out / "history.csv", HistoryCsv(*result.history));
    outputs.emplace_back("history.csv");
  }
  std::vector<fs::path> inputs = {cfg.manifest};
  for (const auto& p : FeatureInputs(train_recs, spec)) inputs.push_back(p);
  for (const auto& p : FeatureInputs(eval_recs, spec)) inputs.push_back(p);
  WriteRunManifest(cfg.out, "train", cfg.ToKeyValues(), cfg.Hash(), cfg.seed, inputs, outputs);
  return result;
}

Predictions RunPredict(const fs::path& model_path, const fs::path& manifest_path, Split split) {
  if (!fs::exists(model_path)) throw Error(ErrorCode::kMissingFile, model_path.string());
  const nnet::Checkpoint ckpt = nnet::LoadCheckpoint(model_path);
  std::string kind, features;
  try {
    const json meta = json::parse(ckpt.meta);
    kind = meta.at("model").get<std::string>();
    features = meta.at("features").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBadConfig, std::string("checkpoint meta: ") + e.what());
  }
  const FeatureSpec spec = FeatureSpec::Parse(features);
  const DatasetManifest manifest = LoadManifest(manifest_path);
  manifest.RequireNonEmpty(split);
  const auto recs = manifest.split_records(split);
  const FeatureExtractor fx;

  Predictions p;
  for (const auto* r : recs) p.ids.push_back(r->id);
  if (classic::IsClassicKind(kind)) {
    p.labels = classic::LoadClassifier(ckpt)->Predict(PooledDataset(recs, spec, fx));
  } else {
    auto model = models::LoadNeuralModel(ckpt);
    const nnet::Dataset data = IsSequenceModel(kind) ? SequenceDataset(recs, spec, fx)
                                                     : ToDataset(PooledDataset(recs, spec, fx));
    p.labels = nnet::PredictAll(*model, data, kPredictBatch);
  }
  return p;
}

EvaluateResult RunEvaluate(const fs::path& ref_path, const fs::path& pred_path,
                           std::optional<Split> split) {
  const Table ref = ReadTable(ref_path);
  const Table pred = ReadTable(pred_path);
  const std::size_t ref_id = ref.Column({"id"}, ref_path);
  const std::size_t ref_label = ref.Column({"label"}, ref_path);
  const std::size_t pred_id = pred.Column({"id"}, pred_path);
  const std::size_t pred_label = pred.Column({"predicted_label", "label"}, pred_path);
  std::optional<std::size_t> ref_split;
  if (split) ref_split = ref.Column({"split"}, ref_path);

  std::map<std::string, int> by_id;
  for (const auto& row : pred.rows) {
    const std::string& id = Cell(row, pred_id, pred_path);
    if (!by_id.emplace(id, ParseLabelCell(Cell(row, pred_label, pred_path))).second)
      throw Error(ErrorCode::kBadManifest, "duplicate prediction for id '" + id + "'");
  }
  std::vector<int> r, p;
  for (const auto& row : ref.rows) {
    if (ref_split && ParseSplit(Cell(row, *ref_split, ref_path)) != *split) continue;
    const std::string& id = Cell(row, ref_id, ref_path);
    auto it = by_id.find(id);
    if (it == by_id.end())
      throw Error(ErrorCode::kLengthMismatch, "no prediction for id '" + id + "'");
    r.push_back(ParseLabelCell(Cell(row, ref_label, ref_path)));
    p.push_back(it->second);
  }
  EvaluateResult out;
  out.confusion = eval::Confusion(r, p);
  out.report = eval::ComputeMetrics(out.confusion);
  return out;
}

std::string SweepCsv(const std::vector<SweepRow>& rows) {
  std::string out = "layer,variant,classifier,uar\n";
  for (const auto& r : rows)
    out += std::to_string(r.layer) + "," + r.variant + "," + r.classifier + "," +
           FormatDouble(r.uar) + "\n";
  return out;
}

std::size_t BestLayer(const std::vector<SweepRow>& rows, const std::string& classifier,
                      const std::string& variant) {
  const SweepRow* best = nullptr;
  for (const auto& r : rows)
    if (r.classifier == classifier && r.variant == variant && (!best || r.uar > best->uar))
      best = &r;
  if (!best) throw Error(ErrorCode::kBadConfig, "no sweep rows for " + classifier + "/" + variant);
  return best->layer;
}

std::vector<SweepRow> RunLayerSweep(const SweepConfig& cfg) {
  for (const auto& v : cfg.variants)
    if (v != "layer" && v != "mfcc+layer")
      throw Error(ErrorCode::kBadConfig, "unknown sweep variant '" + v + "'");
  for (const auto& c : cfg.classifiers)
    if (!classic::IsClassicKind(c))
      throw Error(ErrorCode::kBadConfig, "unknown classifier '" + c + "'");
  const DatasetManifest manifest = LoadManifest(cfg.manifest);
  manifest.RequireNonEmpty(cfg.train_split);
  manifest.RequireNonEmpty(cfg.eval_split);
  const auto train_recs = manifest.split_records(cfg.train_split);
  const auto eval_recs = manifest.split_records(cfg.eval_split);
  const bool need_mfcc =
      std::find(cfg.variants.begin(), cfg.variants.end(), "mfcc+layer") != cfg.variants.end();
  const FeatureExtractor fx;

  // Every bundle is read and pooled once; the sweep then only slices.
  struct Pooled {
    std::vector<PooledVector> layers;
    PooledVector mfcc;
  };
  auto pool_all = [&](const std::vector<const UtteranceRecord*>& recs) {
    std::vector<Pooled> out(recs.size());
    ParallelForEach(recs.size(), [&](std::size_t i) {
      const EmbeddingBundle b = fx.Bundle(*recs[i]);
      for (const auto& seq : b.layers) out[i].layers.push_back(Pool(seq));
      if (need_mfcc) out[i].mfcc = Pool(fx.Mfcc(*recs[i]));
    });
    return out;
  };
  const auto train = pool_all(train_recs);
  const auto val = pool_all(eval_recs);

  std::vector<std::size_t> layers = cfg.layers;
  if (layers.empty())
    for (std::size_t k = 0; k < train.front().layers.size(); ++k) layers.push_back(k);
  auto check = [&](const std::vector<Pooled>& set, const std::vector<const UtteranceRecord*>& recs) {
    for (std::size_t i = 0; i < set.size(); ++i)
      for (std::size_t k : layers)
        if (k >= set[i].layers.size())
          throw Error(ErrorCode::kBadShape, "utterance '" + recs[i]->id + "' has no layer " +
                                                std::to_string(k));
  };
  check(train, train_recs);
  check(val, eval_recs);

  auto matrix = [](const std::vector<Pooled>& set,
                   const std::vector<const UtteranceRecord*>& recs, std::size_t k, bool mfcc) {
    classic::FeatureMatrix m;
    for (std::size_t i = 0; i < set.size(); ++i)
      m.Append(mfcc ? ConcatPooled(set[i].mfcc, set[i].layers[k]) : set[i].layers[k],
               LabelId(recs[i]->label));
    return m;
  };

  const auto cc = ClassicFrom(cfg.standardize, cfg.knn_k, cfg.svm_c, cfg.svm_epochs,
                              cfg.gnb_var_smoothing, cfg.seed);
  std::vector<SweepRow> rows;
  for (std::size_t k : layers) {
    for (const auto& variant : cfg.variants) {
      const bool mfcc = variant == "mfcc+layer";
      const auto x_train = matrix(train, train_recs, k, mfcc);
      const auto x_val = matrix(val, eval_recs, k, mfcc);
      for (const auto& name : cfg.classifiers) {
        auto clf = classic::MakeClassifier(name, cc);
        clf->Fit(x_train);
        const auto cm = eval::Confusion(x_val.labels, clf->Predict(x_val));
        rows.push_back({k, variant, name, eval::ComputeMetrics(cm).uar});
      }
    }
  }

  fs::create_directories(cfg.out);
  WriteFileAtomic(cfg.out / "sweep.csv", SweepCsv(rows));
  std::vector<fs::path> inputs = {cfg.manifest};
  const FeatureSpec read = need_mfcc ? FeatureSpec{FeatureSpec::Kind::kMfccLayer, {0}}
                                     : FeatureSpec{FeatureSpec::Kind::kLayer, {0}};
  for (const auto& p : FeatureInputs(train_recs, read)) inputs.push_back(p);
  for (const auto& p : FeatureInputs(eval_recs, read)) inputs.push_back(p);
  WriteRunManifest(cfg.out, "layer-sweep", cfg.ToKeyValues(), cfg.Hash(), cfg.seed, inputs,
                   {"sweep.csv"});
  return rows;
}

}  // namespace stutter::experiments
