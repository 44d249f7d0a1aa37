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

#include "stutter/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <optional>

#include "CLI11.hpp"
#include "stutter/error.hpp"
#include "stutter/eval.hpp"
#include "stutter/experiments/config.hpp"
#include "stutter/experiments/features.hpp"
#include "stutter/experiments/runs.hpp"
#include "stutter/experiments/synth.hpp"
#include "stutter/io_util.hpp"

namespace stutter {
namespace {

namespace fs = std::filesystem;
using namespace experiments;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

// --config file first, then --set key=value overrides, then --seed / --out.
KeyValues Resolve(const Globals& g, const std::vector<std::string>& sets) {
  KeyValues kv = g.config.empty() ? KeyValues{} : KeyValues::Load(g.config);
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || TrimCopy(s.substr(0, eq)).empty())
      throw Error(ErrorCode::kBadConfig, "--set expects key=value, got '" + s + "'");
    kv.Set(TrimCopy(s.substr(0, eq)), TrimCopy(s.substr(eq + 1)));
  }
  if (g.seed) kv.Set("seed", std::to_string(*g.seed));
  if (!g.out.empty()) kv.Set("out", g.out);
  return kv;
}

std::vector<const UtteranceRecord*> Records(const DatasetManifest& m,
                                            const std::optional<std::string>& split) {
  if (split) {
    const Split s = ParseSplit(*split);
    m.RequireNonEmpty(s);
    return m.split_records(s);
  }
  std::vector<const UtteranceRecord*> all;
  for (const auto& r : m.records()) all.push_back(&r);
  return all;
}

KeyValues Describe(std::initializer_list<std::pair<std::string, std::string>> items) {
  KeyValues kv;
  for (const auto& [k, v] : items) kv.Set(k, v);
  return kv;
}

// id followed by the pooled values, one utterance per row.
void WritePooledCsv(const std::vector<const UtteranceRecord*>& recs,
                    const classic::FeatureMatrix& m, const fs::path& path) {
  std::string out;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    out += recs[i]->id;
    for (std::size_t k = 0; k < m.dim; ++k) out += "," + FormatDouble(m.row(i)[k]);
    out += "\n";
  }
  WriteFileAtomic(path, out);
}

int PoolCommand(const std::string& command, const Globals& g, const std::string& manifest_path,
                const std::string& features, const std::optional<std::string>& split,
                std::ostream& out) {
  const FeatureSpec spec = FeatureSpec::Parse(features);
  const bool combined = spec.kind == FeatureSpec::Kind::kConcat ||
                        spec.kind == FeatureSpec::Kind::kSum ||
                        spec.kind == FeatureSpec::Kind::kMfccLayer;
  if (command == "pool" && combined)
    throw Error(ErrorCode::kBadConfig, "pool takes mfcc or layer:K; use combine for '" + features + "'");
  if (command == "combine" && !combined)
    throw Error(ErrorCode::kBadConfig, "combine takes concat:, sum: or mfcc:layer:, got '" + features + "'");
  const DatasetManifest manifest = LoadManifest(manifest_path);
  const auto recs = Records(manifest, split);
  const auto m = PooledDataset(recs, spec, FeatureExtractor{});
  const fs::path dir = g.out.empty() ? fs::path(command) : fs::path(g.out);
  fs::create_directories(dir);
  const std::string name = command == "pool" ? "pooled.csv" : "combined.csv";
  WritePooledCsv(recs, m, dir / name);
  std::vector<fs::path> inputs = {manifest_path};
  for (const auto& p : FeatureInputs(recs, spec)) inputs.push_back(p);
  const KeyValues kv = Describe({{"manifest", manifest_path},
                                 {"features", spec.ToString()},
                                 {"split", split.value_or("all")},
                                 {"out", dir.string()}});
  WriteRunManifest(dir, command, kv, ConfigHash(kv), 0, inputs, {name});
  out << recs.size() << " vectors of dim " << m.dim << " -> " << (dir / name).string() << "\n";
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stuttering-event classification toolkit", "stutterdet"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "key=value run configuration file");
  app.add_option("--seed", g.seed, "Seed override");
  app.add_option("--out", g.out, "Output directory override");

  // extract-mfcc
  std::string manifest_path;
  std::optional<std::string> split;
  auto* extract = app.add_subcommand("extract-mfcc", "Write 20 x T MFCCs as single-layer EMB1 files");
  extract->add_option("--manifest", manifest_path, "Dataset manifest")->required();
  extract->add_option("--split", split, "train | val | test (default: all)");

  // pool / combine
  std::string features;
  auto* pool = app.add_subcommand("pool", "Pooled mfcc or layer:K vectors as CSV");
  pool->add_option("--manifest", manifest_path, "Dataset manifest")->required();
  pool->add_option("--features", features, "mfcc | layer:K")->required();
  pool->add_option("--split", split, "train | val | test (default: all)");
  auto* combine = app.add_subcommand("combine", "Pooled concat/sum/mfcc:layer vectors as CSV");
  combine->add_option("--manifest", manifest_path, "Dataset manifest")->required();
  combine->add_option("--features", features, "concat:K1,K2 | sum:all | sum:i,j | mfcc:layer:K")
      ->required();
  combine->add_option("--split", split, "train | val | test (default: all)");

  // train
  std::vector<std::string> sets;
  auto* train = app.add_subcommand("train", "Train and score one model");
  train->add_option("--set", sets, "key=value override (repeatable)");

  // predict
  std::string model_path;
  std::string predict_split = "val";
  auto* predict = app.add_subcommand("predict", "Score a manifest split with a saved model");
  predict->add_option("--model", model_path, "model.ckpt from train")->required();
  predict->add_option("--manifest", manifest_path, "Dataset manifest")->required();
  predict->add_option("--split", predict_split, "train | val | test")->capture_default_str();

  // evaluate
  std::string ref_path, pred_path;
  auto* evaluate = app.add_subcommand("evaluate", "Metrics for a prediction CSV");
  evaluate->add_option("--ref", ref_path, "CSV with id,label (a manifest works)")->required();
  evaluate->add_option("--pred", pred_path, "CSV with id,predicted_label")->required();
  evaluate->add_option("--split", split, "Only score reference rows of this split");

  // layer-sweep
  auto* sweep = app.add_subcommand("layer-sweep", "Classic classifiers on each pooled layer");
  sweep->add_option("--set", sets, "key=value override (repeatable)");

  // synth-data
  auto* synth = app.add_subcommand("synth-data", "Generate a synthetic labelled corpus");
  synth->add_option("--set", sets, "key=value override (repeatable)");

  // inspect-bundle
  std::vector<std::string> bundle_paths;
  auto* inspect = app.add_subcommand("inspect-bundle", "Print EMB1 header fields");
  inspect->add_option("paths", bundle_paths, "EMB1 files")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::string what = e.what();
    if (app.get_subcommands().empty()) {
      // CLI11 reports a missing subcommand; name the word that was rejected.
      for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a == "--config" || a == "--seed" || a == "--out") {
          ++i;
          continue;
        }
        if (a.empty() || a[0] == '-') continue;
        bool known = false;
        for (const auto* sub : app.get_subcommands({})) known |= sub->get_name() == a;
        if (!known) what = "unknown subcommand '" + a + "'";
        break;
      }
    }
    err << "error: " << what << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (extract->parsed()) {
      const DatasetManifest manifest = LoadManifest(manifest_path);
      const auto recs = Records(manifest, split);
      const fs::path dir = g.out.empty() ? fs::path("mfcc") : fs::path(g.out);
      fs::create_directories(dir);
      const FeatureExtractor fx;
      std::vector<fs::path> outputs(recs.size());
      ParallelForEach(recs.size(), [&](std::size_t i) {
        EmbeddingBundle b;
        b.layers.push_back(fx.Mfcc(*recs[i]));
        outputs[i] = recs[i]->id + ".emb";
        WriteBundle(b, dir / outputs[i]);
      });
      std::vector<fs::path> inputs = {manifest_path};
      for (const auto& p : FeatureInputs(recs, FeatureSpec{})) inputs.push_back(p);
      const KeyValues kv = Describe({{"manifest", manifest_path},
                                     {"split", split.value_or("all")},
                                     {"out", dir.string()}});
      WriteRunManifest(dir, "extract-mfcc", kv, ConfigHash(kv), 0, inputs, outputs);
      out << recs.size() << " MFCC files -> " << dir.string() << "\n";
      return kExitOk;
    }
    if (pool->parsed()) return PoolCommand("pool", g, manifest_path, features, split, out);
    if (combine->parsed()) return PoolCommand("combine", g, manifest_path, features, split, out);
    if (train->parsed()) {
      const RunConfig cfg = RunConfig::FromKeyValues(Resolve(g, sets));
      const TrainResult r = RunTrain(cfg);
      for (const auto& w : r.report.warnings) err << "warning: " << w << "\n";
      out << eval::SummaryRow(r.report) << "\n";
      return kExitOk;
    }
    if (predict->parsed()) {
      const Predictions p = RunPredict(model_path, manifest_path, ParseSplit(predict_split));
      const fs::path dir = g.out.empty() ? fs::path("predict") : fs::path(g.out);
      fs::create_directories(dir);
      WritePredictions(p, dir / "predictions.csv");
      const KeyValues kv = Describe({{"model", model_path},
                                     {"manifest", manifest_path},
                                     {"split", predict_split},
                                     {"out", dir.string()}});
      WriteRunManifest(dir, "predict", kv, ConfigHash(kv), 0, {model_path, manifest_path},
                       {"predictions.csv"});
      out << p.ids.size() << " predictions -> " << (dir / "predictions.csv").string() << "\n";
      return kExitOk;
    }
    if (evaluate->parsed()) {
      const auto s = split ? std::optional<Split>(ParseSplit(*split)) : std::nullopt;
      const EvaluateResult r = RunEvaluate(ref_path, pred_path, s);
      for (const auto& w : r.report.warnings) err << "warning: " << w << "\n";
      out << eval::SummaryRow(r.report) << "\n";
      if (!g.out.empty()) {
        eval::EmitReport(r.report, r.confusion, g.out);
        const KeyValues kv = Describe({{"ref", ref_path},
                                       {"pred", pred_path},
                                       {"split", split.value_or("all")},
                                       {"out", g.out}});
        WriteRunManifest(g.out, "evaluate", kv, ConfigHash(kv), 0, {ref_path, pred_path},
                         {"metrics.json", "confusion.csv", "summary.txt"});
      }
      return kExitOk;
    }
    if (sweep->parsed()) {
      const SweepConfig cfg = SweepConfig::FromKeyValues(Resolve(g, sets));
      const auto rows = RunLayerSweep(cfg);
      out << SweepCsv(rows);
      return kExitOk;
    }
    if (synth->parsed()) {
      KeyValues kv = Resolve(g, sets);
      const fs::path dir = kv.String("out", "synth");
      const SynthSpec spec = SynthSpec::FromKeyValues(kv);
      const SynthResult r = GenerateSynthetic(spec, dir);
      KeyValues resolved = spec.ToKeyValues();
      resolved.Set("out", dir.string());
      WriteRunManifest(dir, "synth-data", resolved, ConfigHash(resolved), spec.seed, {},
                       {"manifest.csv"});
      out << r.manifest.size() << " utterances -> " << r.manifest_path.string() << "\n";
      return kExitOk;
    }
    if (inspect->parsed()) {
      for (const auto& p : bundle_paths) {
        const BundleInfo info = InspectBundle(p);
        out << p << ": n_layers=" << info.num_layers << " dim=" << info.dim
            << " frames=" << info.frames << " bytes=" << info.file_bytes << "\n";
      }
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::kBadConfig ? kExitUsage : kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace stutter
