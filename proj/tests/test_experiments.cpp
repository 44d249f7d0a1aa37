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

#include <algorithm>
#include <set>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "stutter/cli.hpp"
#include "stutter/error.hpp"
#include "stutter/experiments/config.hpp"
#include "stutter/experiments/features.hpp"
#include "stutter/experiments/runs.hpp"
#include "stutter/experiments/synth.hpp"
#include "stutter/io_util.hpp"
#include "test_util.hpp"

using namespace stutter;
using namespace stutter::experiments;
using stutter::testing::TempDir;
namespace fs = std::filesystem;

namespace {

SynthSpec Small(double separation, std::uint64_t seed = 1) {
  SynthSpec s;
  s.n_per_class = 20;
  s.dim = 16;
  s.frames = 16;
  s.separation = separation;
  s.seed = seed;
  return s;
}

struct Cli {
  int code = -1;
  std::string out, err;
};

Cli Call(std::vector<std::string> args) {
  std::ostringstream o, e;
  Cli r;
  r.code = RunCli(args, o, e);
  r.out = o.str();
  r.err = e.str();
  return r;
}

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::kIo;
}

}  // namespace

TEST_CASE("key=value parsing, typed access and unknown keys") {
  const auto kv = KeyValues::Parse("# comment\n\nmodel = svm\nseed=7\n lr = 0.5 \nfc_hidden=8,4\n");
  CHECK(kv.String("model", "") == "svm");
  CHECK(kv.Uint("seed", 0) == 7);
  CHECK(kv.Double("lr", 0) == 0.5);
  CHECK(kv.Sizes("fc_hidden", {}) == std::vector<std::size_t>{8, 4});
  CHECK_NOTHROW(kv.RejectUnknown());
  CHECK(CodeOf([] { KeyValues::Parse("a=1\na=2\n"); }) == ErrorCode::kBadConfig);
  CHECK(CodeOf([] { KeyValues::Parse("no equals sign\n"); }) == ErrorCode::kBadConfig);
  CHECK(CodeOf([] { KeyValues::Parse("seed=x\n").Uint("seed", 0); }) == ErrorCode::kBadConfig);
  CHECK(CodeOf([] {
          RunConfig::FromKeyValues(KeyValues::Parse("manifest=m.csv\nmodle=svm\n"));
        }) == ErrorCode::kBadConfig);
}

TEST_CASE("run config validation and hashing") {
  auto base = KeyValues::Parse("manifest=m.csv\nmodel=svm\nfeatures=layer:3\n");
  const RunConfig a = RunConfig::FromKeyValues(base);
  CHECK(a.standardize);
  CHECK(a.svm_c == 1.0);

  // Round trip through the resolved listing.
  const RunConfig b = RunConfig::FromKeyValues(a.ToKeyValues());
  CHECK(a.Hash() == b.Hash());

  // The output directory does not enter the hash; the seed does.
  auto moved = base;
  moved.Set("out", "elsewhere");
  CHECK(RunConfig::FromKeyValues(moved).Hash() == a.Hash());
  auto reseeded = base;
  reseeded.Set("seed", "5");
  CHECK(RunConfig::FromKeyValues(reseeded).Hash() != a.Hash());

  for (const char* bad : {"manifest=m.csv\nmodel=svm\nloss=wce\n",
                          "manifest=m.csv\nmodel=sb-stutternet\nloss=joint\n",
                          "manifest=m.csv\nmodel=forest\n", "model=svm\n",
                          "manifest=m.csv\nbatch_size=0\n", "manifest=m.csv\ndropout=1\n"}) {
    CAPTURE(bad);
    CHECK(CodeOf([&] { RunConfig::FromKeyValues(KeyValues::Parse(bad)); }) ==
          ErrorCode::kBadConfig);
  }

  const auto sweep = SweepConfig::FromKeyValues(KeyValues::Parse("manifest=m.csv\nlayers=all\n"));
  CHECK(sweep.layers.empty());
  CHECK(sweep.classifiers == std::vector<std::string>{"svm", "knn", "gnb"});
}

TEST_CASE("feature spec grammar") {
  for (const char* text : {"mfcc", "layer:3", "concat:1,12", "sum:all", "sum:2,5,7", "mfcc:layer:6"})
    CHECK(FeatureSpec::Parse(text).ToString() == text);
  CHECK(FeatureSpec::Parse("mfcc").needs_audio());
  CHECK_FALSE(FeatureSpec::Parse("mfcc").needs_bundle());
  CHECK(FeatureSpec::Parse("mfcc:layer:2").needs_audio());
  CHECK(FeatureSpec::Parse("mfcc:layer:2").needs_bundle());
  for (const char* bad : {"", "layer:", "layer:1,2", "concat:4", "sum:", "wav2vec", "layer:x"}) {
    CAPTURE(bad);
    CHECK(CodeOf([&] { FeatureSpec::Parse(bad); }) == ErrorCode::kBadConfig);
  }
}

TEST_CASE("feature assembly from a bundle") {
  EmbeddingBundle b;
  for (int l = 0; l < 3; ++l) {
    EmbeddingSequence s(4, 5);
    for (std::size_t t = 0; t < 5; ++t)
      for (std::size_t k = 0; k < 4; ++k) s.at(k, t) = l * 100.0 + t * 10.0 + k;
    b.layers.push_back(s);
  }
  const auto concat = FeatureSpec::Parse("concat:0,2");
  CHECK(SequenceFrom(concat, &b, nullptr).dim() == 8);
  CHECK(PooledFrom(concat, &b, nullptr).size() == 16);

  // Pooled concat is the concatenation of the separately pooled parts.
  const auto p0 = Pool(b.layers[0]), p2 = Pool(b.layers[2]);
  auto expect = p0;
  expect.insert(expect.end(), p2.begin(), p2.end());
  CHECK(PooledFrom(concat, &b, nullptr) == expect);

  const auto sum = SequenceFrom(FeatureSpec::Parse("sum:all"), &b, nullptr);
  CHECK(sum.at(1, 2) == doctest::Approx(300.0 + 3 * 21.0));
  CHECK(CodeOf([&] { SequenceFrom(FeatureSpec::Parse("layer:3"), &b, nullptr); }) ==
        ErrorCode::kBadShape);

  // MFCC (20-dim) joined with a layer, pooled part by part.
  EmbeddingSequence mfcc(20, 9);
  CHECK(PooledFrom(FeatureSpec::Parse("mfcc:layer:1"), &b, &mfcc).size() == 40 + 8);
}

TEST_CASE("synthetic corpus: determinism, layout and split") {
  TempDir d1("synth"), d2("synth");
  SynthSpec s = Small(10.0, 9);
  s.mode = "both";
  s.n_per_class = 10;
  const auto a = GenerateSynthetic(s, d1.path());
  GenerateSynthetic(s, d2.path());

  CHECK(a.manifest.size() == 80);
  for (const auto& r : a.manifest.records()) {
    CAPTURE(r.id);
    const std::string rel_e = "bundles/" + r.id + ".emb", rel_w = "wav/" + r.id + ".wav";
    CHECK(ReadFileString(d1 / rel_e) == ReadFileString(d2 / rel_e));
    CHECK(ReadFileString(d1 / rel_w) == ReadFileString(d2 / rel_w));
    const auto info = InspectBundle(d1 / rel_e);
    CHECK(info.num_layers == 13);
    CHECK(info.dim == 16);
    CHECK(info.frames == 16);
  }
  CHECK(ReadFileString(d1 / "manifest.csv") == ReadFileString(d2 / "manifest.csv"));

  // 60/20/20 within each class.
  for (Split sp : {Split::kTrain, Split::kValidation, Split::kTest}) {
    const auto counts = a.manifest.class_counts(sp);
    const std::size_t expect = sp == Split::kTrain ? 6 : 2;
    for (std::size_t c = 0; c < kNumClasses; ++c) CHECK(counts[c] == expect);
  }

  // A different seed changes the data.
  TempDir d3("synth");
  s.seed = 10;
  GenerateSynthetic(s, d3.path());
  CHECK(ReadFileString(d1 / "bundles/utt00000.emb") != ReadFileString(d3 / "bundles/utt00000.emb"));

  SynthSpec neg = Small(-1.0);
  CHECK(CodeOf([&] { neg.Validate(); }) == ErrorCode::kBadConfig);
}

TEST_CASE("synthetic separation drives linear separability") {
  TempDir dir("synth");
  SynthSpec s = Small(10.0, 4);
  s.dim = 32;
  s.n_per_class = 50;
  GenerateSynthetic(s, dir.path());
  RunConfig cfg;
  cfg.manifest = dir / "manifest.csv";
  cfg.model = "svm";
  cfg.features = "layer:5";
  cfg.out = dir / "run";
  const auto r = RunTrain(cfg);
  CHECK(r.report.uar >= 0.95);
}

TEST_CASE("train writes the run directory and reruns byte-identically") {
  TempDir dir("train");
  SynthSpec s = Small(4.0, 2);
  s.mode = "both";
  s.n_per_class = 8;
  GenerateSynthetic(s, dir / "data");

  for (const char* model : {"gnb", "sb-stutternet", "mb-stutternet", "shallow-mb"}) {
    CAPTURE(model);
    RunConfig cfg;
    cfg.manifest = dir / "data/manifest.csv";
    cfg.model = model;
    cfg.features = std::string(model) == "mb-stutternet" ? "mfcc" : "layer:2";
    cfg.channels = 8;
    cfg.fc_hidden = {8};
    cfg.hidden = {8};
    cfg.max_epochs = 3;
    cfg.batch_size = 16;
    cfg.loss = std::string(model) == "gnb" ? "ce" : "wce";
    cfg.seed = 11;
    cfg.out = dir / (std::string(model) + "-a");
    const auto first = RunTrain(cfg);
    cfg.out = dir / (std::string(model) + "-b");
    RunTrain(cfg);

    const fs::path a = dir / (std::string(model) + "-a"), b = dir / (std::string(model) + "-b");
    for (const char* f : {"metrics.json", "confusion.csv", "summary.txt", "predictions.csv",
                          "model.ckpt"}) {
      CAPTURE(f);
      CHECK(ReadFileString(a / f) == ReadFileString(b / f));
    }
    CHECK(fs::exists(a / "history.csv") == first.history.has_value());

    // The manifest records hash, seed and digests; only the out path differs.
    const auto rm = nlohmann::json::parse(ReadFileString(a / "run-manifest.json"));
    const auto rm_b = nlohmann::json::parse(ReadFileString(b / "run-manifest.json"));
    CHECK(rm.at("config_hash") == cfg.Hash());
    CHECK(rm.at("config_hash") == rm_b.at("config_hash"));
    CHECK(rm.at("seed") == 11);
    CHECK(rm.at("inputs") == rm_b.at("inputs"));
    CHECK(rm.at("inputs").size() == 1 + 40 + 16);  // manifest + train + val files
    CHECK(rm.at("outputs").size() >= 5);

    // A saved model scores the eval split exactly as the run did.
    const auto p = RunPredict(a / "model.ckpt", cfg.manifest, Split::kValidation);
    CHECK(PredictionsCsv(p) == ReadFileString(a / "predictions.csv"));
    const auto ev = RunEvaluate(cfg.manifest, a / "predictions.csv", Split::kValidation);
    CHECK(ev.report == first.report);
  }
}

TEST_CASE("missing feature files are reported with the utterance id") {
  TempDir dir("missing");
  SynthSpec s = Small(1.0);
  s.n_per_class = 5;
  const auto syn = GenerateSynthetic(s, dir.path());
  const auto* victim = syn.manifest.split_records(Split::kValidation)[0];
  fs::remove(*victim->embedding_path);

  RunConfig cfg;
  cfg.manifest = syn.manifest_path;
  cfg.model = "knn";
  cfg.features = "layer:0";
  cfg.out = dir / "run";
  try {
    RunTrain(cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMissingFile);
    CHECK(e.detail().find(victim->id) != std::string::npos);
  }

  // MFCC features need audio, which bundle-only corpora lack.
  cfg.features = "mfcc";
  CHECK(CodeOf([&] { RunTrain(cfg); }) == ErrorCode::kMissingFile);
}

TEST_CASE("evaluate joins by id") {
  TempDir dir("evaluate");
  stutter::testing::WriteText(dir / "ref.csv", "id,label\na,Block\nb,Prolongation\nc,NoDisfluency\n");
  stutter::testing::WriteText(dir / "pred.csv",
                              "id,predicted_label\nc,NoDisfluency\na,Block\nb,Block\n");
  const auto r = RunEvaluate(dir / "ref.csv", dir / "pred.csv");
  CHECK(r.confusion.total() == 3);
  CHECK(r.confusion.at(LabelId(Label::kProlongation), LabelId(Label::kBlock)) == 1);
  CHECK(r.report.uar == doctest::Approx(2.0 / 3.0));

  stutter::testing::WriteText(dir / "short.csv", "id,predicted_label\na,Block\n");
  CHECK(CodeOf([&] { RunEvaluate(dir / "ref.csv", dir / "short.csv"); }) ==
        ErrorCode::kLengthMismatch);
  stutter::testing::WriteText(dir / "nolabel.csv", "id,value\na,1\n");
  CHECK(CodeOf([&] { RunEvaluate(dir / "nolabel.csv", dir / "pred.csv"); }) ==
        ErrorCode::kBadManifest);
}

TEST_CASE("layer sweep cardinality and consistency with train") {
  TempDir dir("sweep");
  SynthSpec s = Small(6.0, 3);
  s.mode = "both";
  s.n_per_class = 10;
  s.signal_layers = {3};
  GenerateSynthetic(s, dir / "data");

  SweepConfig sc;
  sc.manifest = dir / "data/manifest.csv";
  sc.layers = {1, 3, 7};
  sc.variants = {"layer", "mfcc+layer"};
  sc.out = dir / "sweep";
  const auto rows = RunLayerSweep(sc);
  CHECK(rows.size() == 3 * 2 * 3);
  const std::string csv = ReadFileString(dir / "sweep/sweep.csv");
  CHECK(csv.rfind("layer,variant,classifier,uar\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 18);
  CHECK(fs::exists(dir / "sweep/run-manifest.json"));

  // A single-layer sweep equals train + evaluate on that layer.
  for (const auto& row : rows) {
    if (row.classifier != "svm" || row.layer != 3) continue;
    CAPTURE(row.variant);
    RunConfig cfg;
    cfg.manifest = sc.manifest;
    cfg.model = "svm";
    cfg.features = row.variant == "layer" ? "layer:3" : "mfcc:layer:3";
    cfg.out = dir / ("train-" + row.variant);
    RunTrain(cfg);
    const auto ev = RunEvaluate(cfg.manifest, cfg.out / "predictions.csv", Split::kValidation);
    CHECK(ev.report.uar == row.uar);
  }

  sc.layers = {13};
  CHECK(CodeOf([&] { RunLayerSweep(sc); }) == ErrorCode::kBadShape);
  sc.layers = {1};
  sc.variants = {"nope"};
  CHECK(CodeOf([&] { RunLayerSweep(sc); }) == ErrorCode::kBadConfig);
}

TEST_CASE("command line surface and exit codes") {
  TempDir dir("cli");
  const std::string data = (dir / "data").string();
  auto synth = Call({"synth-data", "--out", data, "--set", "n_per_class=5", "--set", "dim=8",
                     "--set", "mode=both", "--seed", "4"});
  REQUIRE(synth.code == kExitOk);
  CHECK(fs::exists(dir / "data/run-manifest.json"));
  const std::string manifest = (dir / "data/manifest.csv").string();

  auto inspect = Call({"inspect-bundle", (dir / "data/bundles/utt00000.emb").string()});
  CHECK(inspect.code == kExitOk);
  CHECK(inspect.out.find("n_layers=13 dim=8") != std::string::npos);

  // Perfect predictions: the manifest scored against itself.
  auto perfect = Call({"evaluate", "--ref", manifest, "--pred", manifest});
  CHECK(perfect.code == kExitOk);
  CHECK(perfect.out.find("UAR 100.0") != std::string::npos);

  stutter::testing::WriteText(dir / "run.cfg", "manifest = " + manifest +
                                                   "\nmodel = knn\nfeatures = layer:2\n");
  auto train = Call({"--config", (dir / "run.cfg").string(), "train", "--out",
                     (dir / "run").string()});
  CHECK(train.code == kExitOk);
  CHECK(fs::exists(dir / "run/metrics.json"));
  auto again = Call({"train", "--config", (dir / "run.cfg").string(), "--out",
                     (dir / "run2").string()});
  CHECK(again.code == kExitOk);
  CHECK(ReadFileString(dir / "run/metrics.json") == ReadFileString(dir / "run2/metrics.json"));

  auto predict = Call({"predict", "--model", (dir / "run/model.ckpt").string(), "--manifest",
                       manifest, "--out", (dir / "pred").string()});
  CHECK(predict.code == kExitOk);
  CHECK(ReadFileString(dir / "pred/predictions.csv") ==
        ReadFileString(dir / "run/predictions.csv"));

  auto pooled = Call({"pool", "--manifest", manifest, "--features", "layer:1", "--out",
                      (dir / "pooled").string()});
  CHECK(pooled.code == kExitOk);
  const std::string pooled_csv = ReadFileString(dir / "pooled/pooled.csv");
  const std::string first_row = pooled_csv.substr(0, pooled_csv.find('\n'));
  CHECK(std::count(first_row.begin(), first_row.end(), ',') == 16);  // id + 2 * dim values
  auto combined = Call({"combine", "--manifest", manifest, "--features", "concat:1,2", "--out",
                        (dir / "combined").string()});
  CHECK(combined.code == kExitOk);
  auto mfcc = Call({"extract-mfcc", "--manifest", manifest, "--split", "test", "--out",
                    (dir / "mfcc").string()});
  CHECK(mfcc.code == kExitOk);
  std::size_t n_mfcc = 0;
  for (const auto& e : fs::directory_iterator(dir / "mfcc")) {
    if (e.path().extension() != ".emb") continue;
    CHECK(InspectBundle(e.path()).dim == 20);
    ++n_mfcc;
  }
  CHECK(n_mfcc == 8);  // one test utterance per class

  auto sweep = Call({"layer-sweep", "--set", "manifest=" + manifest, "--set", "layers=0,1",
                     "--set", "classifiers=gnb", "--out", (dir / "sweep").string()});
  CHECK(sweep.code == kExitOk);
  CHECK(fs::exists(dir / "sweep/sweep.csv"));

  // Usage errors: exit 1 and name the culprit.
  auto unknown = Call({"frobnicate"});
  CHECK(unknown.code == kExitUsage);
  CHECK(unknown.err.find("frobnicate") != std::string::npos);
  CHECK(unknown.err.find("Usage") != std::string::npos);
  auto bad_flag = Call({"evaluate", "--ref", manifest, "--pred", manifest, "--bogus"});
  CHECK(bad_flag.code == kExitUsage);
  CHECK(bad_flag.err.find("--bogus") != std::string::npos);
  auto bad_key = Call({"train", "--set", "manifest=" + manifest, "--set", "colour=blue"});
  CHECK(bad_key.code == kExitUsage);
  CHECK(bad_key.err.find("colour") != std::string::npos);
  CHECK(Call({"evaluate", "--ref", manifest}).code == kExitUsage);

  // Data errors: exit 2.
  CHECK(Call({"evaluate", "--ref", (dir / "absent.csv").string(), "--pred", manifest}).code ==
        kExitData);
  CHECK(Call({"inspect-bundle", manifest}).code == kExitData);
  CHECK(Call({"train", "--set", "manifest=" + (dir / "absent.csv").string()}).code == kExitData);

  CHECK(Call({"--help"}).code == kExitOk);
}
