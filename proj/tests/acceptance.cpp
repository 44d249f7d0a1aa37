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

// Acceptance run: one PASS/FAIL line per criterion, each with its runtime
// budget. Exit status is non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "stutter/audio.hpp"
#include "stutter/classic.hpp"
#include "stutter/cli.hpp"
#include "stutter/embedding.hpp"
#include "stutter/error.hpp"
#include "stutter/eval.hpp"
#include "stutter/experiments/runs.hpp"
#include "stutter/experiments/synth.hpp"
#include "stutter/io_util.hpp"
#include "stutter/models.hpp"
#include "stutter/nnet/losses.hpp"
#include "test_util.hpp"

using namespace stutter;
using namespace stutter::experiments;
using stutter::testing::TempDir;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  double budget_s;
  std::function<Outcome()> run;
};

std::string Fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

// ----- UAR arithmetic -----

Outcome UarArithmetic() {
  struct Row {
    const char* name;
    std::vector<double> recalls;
    const char* expect;
    double expect_value;
  };
  const std::vector<Row> rows = {
      {"SVM+L5", {9.09, 69.61, 22.64, 23.68, 32.69, 70.27, 0.00, 67.57}, "36.9", 36.9},
      {"MB+sum", {12.12, 78.43, 39.62, 26.32, 58.65, 80.00, 0.00, 32.88}, "41.0", 41.0}};
  Outcome o{true, ""};
  for (const auto& r : rows) {
    double oracle = 0.0;
    for (double v : r.recalls) oracle += v;
    oracle /= static_cast<double>(r.recalls.size());
    const double uar = 100.0 * eval::UarFromRecallPercents(r.recalls);
    const std::string shown = eval::FormatPercent1(uar);
    o.pass &= std::abs(uar - oracle) <= 1e-9 && shown == r.expect &&
              std::abs(uar - r.expect_value) <= 0.05;
    o.detail += std::string(o.detail.empty() ? "" : "; ") + r.name + " UAR " + shown + " (" +
                Fmt("%.5f", uar) + ", expect " + r.expect + ")";
  }
  return o;
}

// ----- gradient suite -----

Outcome GradientSuite() {
  using namespace stutter::testing;
  constexpr int kConfigs = 20;
  std::map<std::string, double> worst = {
      {"tdnn", GradTdnn(kConfigs, 101)},       {"fc", GradLinear(kConfigs, 102)},
      {"batchnorm", GradBatchNorm(kConfigs, 103)}, {"statpool", GradStatPool(kConfigs, 104)},
      {"relu", GradRelu(kConfigs, 105)}};
  const auto losses = GradLosses(kConfigs, 106);
  worst["ce"] = losses.ce;
  worst["wce"] = losses.wce;
  worst["joint"] = losses.joint;
  Outcome o{true, std::to_string(kConfigs) + " configs each; max rel err"};
  for (const auto& [name, err] : worst) {
    o.pass &= err < kMaxRelErr;
    o.detail += " " + name + "=" + Fmt("%.1e", err);
  }
  return o;
}

// ----- loss identities -----

double RowNll(const double* row, std::size_t classes, int label) {
  double m = row[0];
  for (std::size_t c = 1; c < classes; ++c) m = std::max(m, row[c]);
  double denom = 0.0;
  for (std::size_t c = 0; c < classes; ++c) denom += std::exp(row[c] - m);
  return std::log(denom) + m - row[label];
}

Outcome LossIdentities() {
  using namespace stutter::nnet;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  auto matrix = [&](std::size_t r, std::size_t c) {
    Tensor t = Tensor::Matrix(r, c);
    for (auto& v : t.values) v = g(rng);
    return t;
  };
  auto labels = [&](std::size_t n, int classes) {
    std::vector<int> y(n);
    for (auto& v : y) v = static_cast<int>(rng() % classes);
    return y;
  };

  // WCE with one shared weight is plain CE.
  double wce_err = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng() % 9;
    const Tensor logits = matrix(n, 8);
    const auto y = labels(n, 8);
    const std::vector<double> alpha(8, 0.1 + std::abs(g(rng)));
    const auto a = CrossEntropy(logits, y);
    const auto b = WeightedCrossEntropy(logits, y, alpha);
    wce_err = std::max(wce_err, std::abs(a.value - b.value));
    for (std::size_t i = 0; i < a.grad.values.size(); ++i)
      wce_err = std::max(wce_err, std::abs(a.grad.values[i] - b.grad.values[i]));
  }

  // Joint loss is the sum of the two branch losses, each against a direct
  // per-row oracle.
  double joint_err = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng() % 12;
    const Tensor fl = matrix(n, 2), dl = matrix(n, 7);
    const auto y = labels(n, kNumClasses);
    double lf = 0.0, ld = 0.0;
    std::size_t n_dis = 0;
    for (std::size_t i = 0; i < n; ++i) {
      lf += RowNll(&fl.values[i * 2], 2, IsFluent(y[i]) ? 0 : 1);
      if (!IsFluent(y[i])) {
        ld += RowNll(&dl.values[i * 7], 7, y[i]);
        ++n_dis;
      }
    }
    lf /= static_cast<double>(n);
    if (n_dis) ld /= static_cast<double>(n_dis);
    const auto j = JointLoss(fl, dl, y);
    joint_err = std::max({joint_err, std::abs(j.value - (lf + ld)), std::abs(j.fluent - lf),
                          std::abs(j.disfluent - ld)});
  }

  // Encoder gradient additivity and a silent disfluent branch on an
  // all-fluent batch, through the full multi-branch network.
  auto net = models::MultiBranchNet::StutterNet({8, {8, 8}}, 6, 3);
  Tensor x = Tensor::Sequence(5, 18, 6, std::vector<std::size_t>(5, 18));
  for (auto& v : x.values) v = g(rng);
  const std::vector<int> y = {0, 3, 7, 5, 7};
  auto encoder_grads = [&](bool use_f, bool use_d) {
    for (auto* p : net.Params()) p->ZeroGrad();
    const auto out = net.Forward(x, Mode::kTrain);
    const auto loss = JointLoss(out.fluent, out.disfluent, y);
    Tensor gf = loss.fluent_grad, gd = loss.disfluent_grad;
    if (!use_f) std::fill(gf.values.begin(), gf.values.end(), 0.0);
    if (!use_d) std::fill(gd.values.begin(), gd.values.end(), 0.0);
    net.Backward(gf, gd);
    std::vector<double> out_g;
    for (auto* p : net.EncoderParams()) out_g.insert(out_g.end(), p->grad.begin(), p->grad.end());
    return out_g;
  };
  const auto both = encoder_grads(true, true), f_only = encoder_grads(true, false),
             d_only = encoder_grads(false, true);
  double additivity = 0.0;
  for (std::size_t i = 0; i < both.size(); ++i)
    additivity = std::max(additivity, std::abs(both[i] - (f_only[i] + d_only[i])));

  net.TrainStep(Batch{x, std::vector<int>(5, LabelId(Label::kNoDisfluency))});
  double theta_d = 0.0;
  for (auto* p : net.DisfluentParams())
    for (double v : p->grad) theta_d = std::max(theta_d, std::abs(v));

  // Contrastive: equal similarities give ln(K+1); a matching target with one
  // orthogonal distractor at tau = 0.1 gives ln(1 + e^-10).
  double sym_err = 0.0;
  const std::vector<double> c = {1.0, 0.0, 0.0};
  for (std::size_t k = 1; k <= 10; ++k) {
    std::vector<std::vector<double>> distractors;
    for (std::size_t i = 0; i < k; ++i) distractors.push_back({1.0 + i, 0.0, 0.0});
    sym_err = std::max(sym_err, std::abs(ContrastiveLoss(c, std::vector<double>{2.0, 0.0, 0.0}, distractors, 0.5) -
                                         std::log(static_cast<double>(k + 1))));
  }
  const std::vector<double> q = {0.3, -1.2, 2.0}, orth = {1.2, 0.3, 0.0};
  const double two = ContrastiveLoss(q, q, {orth}, 0.1);
  const double two_err = std::abs(two - std::log1p(std::exp(-10.0)));

  Outcome o;
  o.pass = wce_err <= 1e-12 && joint_err <= 1e-10 && additivity <= 1e-10 && theta_d <= 1e-10 &&
           sym_err <= 1e-12 && two_err <= 1e-9;
  o.detail = "wce-ce " + Fmt("%.1e", wce_err) + ", joint sum " + Fmt("%.1e", joint_err) +
             ", encoder additivity " + Fmt("%.1e", additivity) + ", theta_d grad " +
             Fmt("%.1e", theta_d) + ", ln(K+1) " + Fmt("%.1e", sym_err) + ", ln(1+e^-10) " +
             Fmt("%.1e", two_err);
  return o;
}

// ----- classic classifier oracles -----

classic::FeatureMatrix Blobs(std::size_t n, std::size_t dim, double spread, std::uint64_t seed,
                             bool random_labels = false) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> centres(kNumClasses * dim);
  for (auto& v : centres) v = spread * g(rng);
  classic::FeatureMatrix m;
  m.dim = dim;
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % kNumClasses);
    std::vector<double> x(dim);
    for (std::size_t k = 0; k < dim; ++k)
      x[k] = (random_labels ? 0.0 : centres[c * dim + k]) + g(rng) * (random_labels ? spread : 1.0);
    m.Append(x, c);
  }
  return m;
}

// Population standardization, recomputed from scratch.
classic::FeatureMatrix Standardize(const classic::FeatureMatrix& fit,
                                   const classic::FeatureMatrix& x) {
  std::vector<double> mean(fit.dim, 0.0), sd(fit.dim, 0.0);
  for (std::size_t i = 0; i < fit.rows(); ++i)
    for (std::size_t k = 0; k < fit.dim; ++k) mean[k] += fit.row(i)[k];
  for (auto& v : mean) v /= static_cast<double>(fit.rows());
  for (std::size_t i = 0; i < fit.rows(); ++i)
    for (std::size_t k = 0; k < fit.dim; ++k) sd[k] += std::pow(fit.row(i)[k] - mean[k], 2);
  for (auto& v : sd) v = std::sqrt(v / static_cast<double>(fit.rows()));
  classic::FeatureMatrix out;
  out.dim = x.dim;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    std::vector<double> r(x.dim);
    for (std::size_t k = 0; k < x.dim; ++k)
      r[k] = (x.row(i)[k] - mean[k]) / (sd[k] > 0.0 ? sd[k] : 1.0);
    out.Append(r, x.labels[i]);
  }
  return out;
}

int KnnOracle(const classic::FeatureMatrix& train, const double* q, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> d;
  for (std::size_t i = 0; i < train.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < train.dim; ++j) s += std::pow(q[j] - train.row(i)[j], 2);
    d.emplace_back(s, i);
  }
  std::sort(d.begin(), d.end());
  std::vector<int> votes(kNumClasses, 0);
  std::vector<double> dist(kNumClasses, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    votes[train.labels[d[j].second]]++;
    dist[train.labels[d[j].second]] += std::sqrt(d[j].first);
  }
  int best = -1;
  for (int c = 0; c < kNumClasses; ++c) {
    if (votes[c] == 0) continue;
    if (best < 0 || votes[c] > votes[best] || (votes[c] == votes[best] && dist[c] < dist[best]))
      best = c;
  }
  return best;
}

std::vector<int> GnbOracle(const classic::FeatureMatrix& train, const classic::FeatureMatrix& q,
                           double smoothing) {
  const std::size_t dim = train.dim;
  std::vector<double> mean(kNumClasses * dim, 0.0), var(kNumClasses * dim, 0.0);
  std::vector<double> count(kNumClasses, 0.0);
  for (std::size_t i = 0; i < train.rows(); ++i) {
    count[train.labels[i]] += 1;
    for (std::size_t k = 0; k < dim; ++k) mean[train.labels[i] * dim + k] += train.row(i)[k];
  }
  for (int c = 0; c < kNumClasses; ++c)
    for (std::size_t k = 0; k < dim; ++k) mean[c * dim + k] /= count[c];
  for (std::size_t i = 0; i < train.rows(); ++i)
    for (std::size_t k = 0; k < dim; ++k)
      var[train.labels[i] * dim + k] += std::pow(train.row(i)[k] - mean[train.labels[i] * dim + k], 2);
  // Smoothing is relative to the largest overall feature variance.
  double max_var = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    double m = 0.0, v = 0.0;
    for (std::size_t i = 0; i < train.rows(); ++i) m += train.row(i)[k];
    m /= static_cast<double>(train.rows());
    for (std::size_t i = 0; i < train.rows(); ++i) v += std::pow(train.row(i)[k] - m, 2);
    max_var = std::max(max_var, v / static_cast<double>(train.rows()));
  }
  for (int c = 0; c < kNumClasses; ++c)
    for (std::size_t k = 0; k < dim; ++k)
      var[c * dim + k] = var[c * dim + k] / count[c] + smoothing * max_var;

  std::vector<int> out;
  for (std::size_t i = 0; i < q.rows(); ++i) {
    int best = 0;
    double best_ll = -INFINITY;
    for (int c = 0; c < kNumClasses; ++c) {
      double ll = std::log(count[c] / static_cast<double>(train.rows()));
      for (std::size_t k = 0; k < dim; ++k) {
        const double v = var[c * dim + k], e = q.row(i)[k] - mean[c * dim + k];
        ll += -0.5 * std::log(2.0 * M_PI * v) - e * e / (2.0 * v);
      }
      if (ll > best_ll) {
        best_ll = ll;
        best = c;
      }
    }
    out.push_back(best);
  }
  return out;
}

Outcome OracleEquivalence() {
  constexpr std::size_t kPoints = 250;
  const auto train = Blobs(240, 6, 1.5, 31);
  const auto queries = Blobs(kPoints, 6, 2.5, 32, true);
  const classic::ClassicConfig cfg;
  const auto ztrain = Standardize(train, train);
  const auto zq = Standardize(train, queries);

  classic::Knn knn(cfg);
  knn.Fit(train);
  const auto knn_pred = knn.Predict(queries);
  std::size_t knn_ok = 0;
  for (std::size_t i = 0; i < kPoints; ++i) knn_ok += knn_pred[i] == KnnOracle(ztrain, zq.row(i), cfg.knn_k);

  classic::GaussianNb gnb(cfg);
  gnb.Fit(train);
  const auto gnb_pred = gnb.Predict(queries);
  const auto gnb_ref = GnbOracle(ztrain, zq, cfg.gnb_var_smoothing);
  std::size_t gnb_ok = 0;
  for (std::size_t i = 0; i < kPoints; ++i) gnb_ok += gnb_pred[i] == gnb_ref[i];

  // OvR decomposition: eight independently trained binary machines, argmax
  // of their decision values (first on ties).
  classic::LinearSvm svm(cfg);
  svm.Fit(train);
  const auto svm_pred = svm.Predict(queries);
  std::vector<classic::BinarySvm> machines;
  for (int c = 0; c < kNumClasses; ++c) {
    std::vector<int> y(ztrain.rows());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = ztrain.labels[i] == c ? 1 : -1;
    machines.push_back(classic::TrainBinarySvm(ztrain, y, cfg.svm_c, cfg.svm_epochs, cfg.seed + c));
  }
  std::size_t svm_ok = 0;
  for (std::size_t i = 0; i < kPoints; ++i) {
    int best = 0;
    for (int c = 1; c < kNumClasses; ++c)
      if (machines[c].Decision(zq.row(i)) > machines[best].Decision(zq.row(i))) best = c;
    svm_ok += svm_pred[i] == best;
  }

  Outcome o;
  o.pass = knn_ok == kPoints && gnb_ok == kPoints && svm_ok == kPoints;
  o.detail = "agreement on " + std::to_string(kPoints) + " points: knn " + std::to_string(knn_ok) +
             ", gnb " + std::to_string(gnb_ok) + ", svm(ovr) " + std::to_string(svm_ok);
  return o;
}

// ----- end-to-end learning -----

Outcome EndToEnd() {
  TempDir dir("acceptance-e2e");
  Outcome o{true, ""};

  // Separable: 8 classes x 50 = 400 utterances.
  SynthSpec sep;
  sep.n_per_class = 50;
  sep.dim = 32;
  sep.frames = 16;
  sep.separation = 10.0;
  sep.seed = 1;
  GenerateSynthetic(sep, dir / "sep");
  RunConfig cfg;
  cfg.manifest = dir / "sep/manifest.csv";
  cfg.model = "mb-stutternet";
  cfg.features = "layer:0";
  cfg.max_epochs = 200;
  cfg.seed = 5;
  cfg.out = dir / "sep-run";
  const auto r = RunTrain(cfg);
  const auto train_pred = RunPredict(cfg.out / "model.ckpt", cfg.manifest, Split::kTrain);
  WritePredictions(train_pred, dir / "train-pred.csv");
  const auto train_eval = RunEvaluate(cfg.manifest, dir / "train-pred.csv", Split::kTrain);
  const std::size_t epochs = r.history ? r.history->epochs.size() : 0;
  o.pass &= train_eval.report.uar >= 0.99 && r.report.uar >= 0.90 && epochs <= 200;
  o.detail = "sep=10: MB StutterNet train UAR " + Fmt("%.3f", train_eval.report.uar) +
             ", val UAR " + Fmt("%.3f", r.report.uar) + " after " + std::to_string(epochs) +
             " epochs; sep=0 val UAR:";

  // Chance level: 8 classes x 400 utterances of pure noise.
  SynthSpec noise = sep;
  noise.n_per_class = 400;
  noise.separation = 0.0;
  noise.seed = 2;
  GenerateSynthetic(noise, dir / "noise");
  for (const char* model : {"sb-stutternet", "mb-stutternet", "shallow-mb", "svm", "knn", "gnb"}) {
    RunConfig c;
    c.manifest = dir / "noise/manifest.csv";
    c.model = model;
    c.features = "layer:0";
    c.seed = 6;
    c.out = dir / (std::string("noise-") + model);
    const double uar = RunTrain(c).report.uar;
    o.pass &= std::abs(uar - 0.125) <= 0.05;
    o.detail += std::string(" ") + model + "=" + Fmt("%.3f", uar);
  }
  return o;
}

// ----- layer sweep -----

Outcome LayerSweep() {
  TempDir dir("acceptance-sweep");
  SynthSpec s;
  s.n_per_class = 30;
  s.dim = 64;
  s.frames = 10;
  s.signal_layers = {3};
  s.separation = 5.0;
  s.seed = 3;
  GenerateSynthetic(s, dir.path());
  SweepConfig cfg;
  cfg.manifest = dir / "manifest.csv";
  cfg.out = dir / "sweep";
  const auto rows = RunLayerSweep(cfg);
  Outcome o{rows.size() == 13 * 3, "argmax layer:"};
  for (const char* clf : {"svm", "knn", "gnb"}) {
    const std::size_t best = BestLayer(rows, clf);
    double at3 = 0.0, other = 0.0;
    for (const auto& r : rows) {
      if (r.classifier != clf) continue;
      if (r.layer == 3) at3 = r.uar;
      else other = std::max(other, r.uar);
    }
    o.pass &= best == 3;
    o.detail += std::string(" ") + clf + "=" + std::to_string(best) + " (L3 " + Fmt("%.3f", at3) +
                ", best other " + Fmt("%.3f", other) + ")";
  }
  return o;
}

// ----- pooling and formats -----

Outcome PoolingFormat() {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  Outcome o{true, ""};

  // Pooling: mean then population std per dimension.
  EmbeddingSequence seq(kEmbeddingDim, 37);
  for (auto& v : seq.data()) v = g(rng);
  const PooledVector pooled = Pool(seq);
  double pool_err = 0.0;
  for (std::size_t k = 0; k < kEmbeddingDim; k += 97) {
    double m = 0.0, v = 0.0;
    for (std::size_t t = 0; t < 37; ++t) m += seq.at(k, t);
    m /= 37.0;
    for (std::size_t t = 0; t < 37; ++t) v += std::pow(seq.at(k, t) - m, 2);
    pool_err = std::max({pool_err, std::abs(pooled[k] - m),
                         std::abs(pooled[kEmbeddingDim + k] - std::sqrt(v / 37.0))});
  }
  o.pass &= pooled.size() == 2 * kEmbeddingDim && pool_err <= 1e-6;
  o.detail = "pool(768 x 37) -> " + std::to_string(pooled.size()) + " values";

  // EMB1: float32-exact values survive write -> read bit for bit, and the
  // header matches the documented layout.
  TempDir dir("acceptance-emb");
  EmbeddingBundle b;
  for (std::size_t l = 0; l < kBundleLayers; ++l) {
    EmbeddingSequence s(kEmbeddingDim, 11);
    for (auto& v : s.data()) v = static_cast<double>(static_cast<float>(g(rng)));
    b.layers.push_back(std::move(s));
  }
  WriteBundle(b, dir / "b.emb");
  const EmbeddingBundle back = ReadBundle(dir / "b.emb");
  const std::string bytes = ReadFileString(dir / "b.emb");
  const bool header = bytes.substr(0, 4) == "EMB1" && ReadLE<std::uint32_t>(bytes.data() + 4) == 13 &&
                      ReadLE<std::uint32_t>(bytes.data() + 8) == 768 &&
                      ReadLE<std::uint32_t>(bytes.data() + 12) == 11 &&
                      bytes.size() == 16 + 13 * 11 * 768 * 4;
  const bool round_trip = back == b && EncodeBundle(back) == bytes;
  o.pass &= header && round_trip;
  o.detail += std::string("; EMB1 round trip ") + (round_trip ? "bit-exact" : "MISMATCH") +
              ", header " + (header ? "ok" : "BAD");

  // MFCC framing: floor((n - 400) / 160) + 1 frames at 16 kHz.
  const MfccExtractor mfcc{MfccConfig{}};
  std::size_t frames_ok = 0;
  std::uniform_int_distribution<std::size_t> len(400, 40000);
  for (int i = 0; i < 50; ++i) {
    Waveform w;
    w.samples.resize(len(rng));
    for (auto& v : w.samples) v = 0.1 * g(rng);
    const std::size_t expect = (w.samples.size() - 400) / 160 + 1;
    const auto m = mfcc.Compute(w);
    frames_ok += m.frames() == expect && m.dim() == 20;
  }
  o.pass &= frames_ok == 50;
  o.detail += "; MFCC frame count " + std::to_string(frames_ok) + "/50";
  return o;
}

// ----- determinism -----

Outcome Determinism() {
  TempDir dir("acceptance-det");
  SynthSpec s;
  s.n_per_class = 12;
  s.dim = 16;
  s.frames = 16;
  s.separation = 3.0;
  s.mode = "both";
  s.seed = 4;
  GenerateSynthetic(s, dir / "data");
  Outcome o{true, "metrics.json reruns:"};
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"mb-stutternet", "model = mb-stutternet\nfeatures = mfcc\nloss = wce\nmax_epochs = 5\n"},
      {"sb-stutternet", "model = sb-stutternet\nfeatures = concat:1,2\nmax_epochs = 5\n"},
      {"shallow-mb", "model = shallow-mb\nfeatures = sum:all\nmax_epochs = 5\n"},
      {"svm", "model = svm\nfeatures = mfcc:layer:4\n"},
      {"knn", "model = knn\nfeatures = layer:6\n"},
      {"gnb", "model = gnb\nfeatures = layer:6\n"}};
  for (const auto& [name, body] : runs) {
    const fs::path cfg = dir / (name + ".cfg");
    stutter::testing::WriteText(cfg, "manifest = " + (dir / "data/manifest.csv").string() +
                                         "\nseed = 13\n" + body);
    bool same = true;
    std::string first;
    for (int rep = 0; rep < 2; ++rep) {
      std::ostringstream out, err;
      const fs::path run = dir / (name + "-" + std::to_string(rep));
      const int code = RunCli({"train", "--config", cfg.string(), "--out", run.string()}, out, err);
      if (code != kExitOk) {
        same = false;
        break;
      }
      const std::string metrics = ReadFileString(run / "metrics.json");
      if (rep == 0) first = metrics;
      else same &= metrics == first;
    }
    o.pass &= same;
    o.detail += " " + name + (same ? "=identical" : "=DIFFERENT");
  }
  return o;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"uar-arithmetic", 1.0, UarArithmetic},
      {"gradient-suite", 120.0, GradientSuite},
      {"loss-identities", 60.0, LossIdentities},
      {"oracle-equivalence", 60.0, OracleEquivalence},
      {"end-to-end-learning", 600.0, EndToEnd},
      {"layer-sweep", 300.0, LayerSweep},
      {"pooling-format", 60.0, PoolingFormat},
      {"determinism", 300.0, Determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::cout << (pass ? "PASS " : "FAIL ") << c.name << " | " << o.detail << " | "
              << Fmt("%.2f", secs) << " s (budget " << Fmt("%.0f", c.budget_s) << " s"
              << (in_time ? "" : ", EXCEEDED") << ")" << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
