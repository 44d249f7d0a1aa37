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

#include "stutter/classic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "json.hpp"
#include "stutter/error.hpp"
#include "stutter/kernels.hpp"

namespace stutter::classic {
namespace {

using json = nlohmann::ordered_json;
using Index = std::ptrdiff_t;

constexpr std::size_t kQueryBlock = 256;

std::vector<std::uint64_t> Shape1(std::size_t n) { return {n}; }

int ArgmaxLowestTie(const double* v, std::size_t n) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < n; ++k)
    if (v[k] > v[best]) best = k;
  return static_cast<int>(best);
}

std::vector<int> LabelsFrom(const nnet::NamedTensor& t) {
  std::vector<int> out(t.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<int>(t.values[i]);
  return out;
}

}  // namespace

void FeatureMatrix::Append(std::span<const double> x, int label) {
  if (dim == 0) dim = x.size();
  if (x.size() != dim || dim == 0)
    throw Error(ErrorCode::kBadShape, "feature vector of length " + std::to_string(x.size()) +
                                          ", expected " + std::to_string(dim));
  values.insert(values.end(), x.begin(), x.end());
  labels.push_back(label);
}

// ----- Standardizer -----

void Standardizer::Fit(const FeatureMatrix& x) {
  const std::size_t n = x.rows(), d = x.dim;
  mean.assign(d, 0.0);
  scale.assign(d, 1.0);
  if (!enabled || n == 0) return;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k) mean[k] += x.row(i)[k];
  for (auto& m : mean) m /= static_cast<double>(n);
  std::vector<double> var(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      const double c = x.row(i)[k] - mean[k];
      var[k] += c * c;
    }
  }
  for (std::size_t k = 0; k < d; ++k) {
    const double sd = std::sqrt(var[k] / static_cast<double>(n));
    scale[k] = sd > 0.0 ? sd : 1.0;
  }
}

FeatureMatrix Standardizer::Apply(const FeatureMatrix& x) const {
  if (!enabled) return x;
  FeatureMatrix out = x;
  const std::size_t d = x.dim;
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t k = 0; k < d; ++k)
      out.values[i * d + k] = (x.values[i * d + k] - mean[k]) / scale[k];
  return out;
}

// ----- Classifier -----

void Classifier::Fit(const FeatureMatrix& train) {
  if (train.rows() == 0) throw Error(ErrorCode::kEmptySplit, "no training vectors");
  if (train.labels.size() != train.rows())
    throw Error(ErrorCode::kLengthMismatch, "labels do not match training rows");
  for (int y : train.labels)
    if (y < 0 || static_cast<std::size_t>(y) >= config_.classes)
      throw Error(ErrorCode::kUnknownLabel, "label id " + std::to_string(y));
  scaler_ = Standardizer{};
  scaler_.enabled = config_.standardize;
  scaler_.Fit(train);
  dim_ = train.dim;
  fitted_ = false;
  FitScaled(scaler_.Apply(train));
  fitted_ = true;
}

std::vector<int> Classifier::Predict(const FeatureMatrix& x) const {
  if (!fitted_) throw Error(ErrorCode::kUnfitted, kind() + " has not been fitted");
  if (x.rows() == 0) return {};
  if (x.dim != dim_)
    throw Error(ErrorCode::kBadShape, "expected dim " + std::to_string(dim_) + ", got " +
                                          std::to_string(x.dim));
  return PredictScaled(scaler_.Apply(x));
}

nnet::Checkpoint Classifier::ToCheckpoint() const {
  if (!fitted_) throw Error(ErrorCode::kUnfitted, kind() + " has not been fitted");
  nnet::Checkpoint ckpt;
  json meta;
  meta["model"] = kind();
  meta["dim"] = dim_;
  meta["classes"] = config_.classes;
  meta["standardize"] = config_.standardize;
  meta["knn_k"] = config_.knn_k;
  meta["gnb_var_smoothing"] = config_.gnb_var_smoothing;
  meta["svm_c"] = config_.svm_c;
  meta["svm_epochs"] = config_.svm_epochs;
  ckpt.meta = meta.dump();
  ckpt.seed = config_.seed;
  ckpt.Add("scaler.mean", Shape1(scaler_.mean.size()), scaler_.mean);
  ckpt.Add("scaler.scale", Shape1(scaler_.scale.size()), scaler_.scale);
  SaveState(ckpt);
  return ckpt;
}

// ----- KNN -----

void Knn::FitScaled(const FeatureMatrix& train) {
  if (config_.knn_k == 0 || config_.knn_k > train.rows())
    throw Error(ErrorCode::kBadConfig, "k = " + std::to_string(config_.knn_k) + " with " +
                                           std::to_string(train.rows()) + " training points");
  train_ = train;
}

std::vector<int> Knn::PredictScaled(const FeatureMatrix& x) const {
  const std::size_t n_ref = train_.rows(), k = config_.knn_k, classes = config_.classes;
  std::vector<int> out(x.rows());
  std::vector<double> dist;
  for (std::size_t start = 0; start < x.rows(); start += kQueryBlock) {
    const std::size_t block = std::min(kQueryBlock, x.rows() - start);
    dist.resize(block * n_ref);
    kernels::parallel::SquaredDistances(block, n_ref, x.dim, x.row(start), train_.values.data(),
                                        dist.data());
#pragma omp parallel for schedule(static)
    for (Index q = 0; q < static_cast<Index>(block); ++q) {
      const double* dq = dist.data() + q * static_cast<Index>(n_ref);
      std::vector<std::size_t> order(n_ref);
      std::iota(order.begin(), order.end(), 0);
      auto closer = [dq](std::size_t a, std::size_t b) {
        return dq[a] < dq[b] || (dq[a] == dq[b] && a < b);
      };
      std::partial_sort(order.begin(), order.begin() + static_cast<Index>(k), order.end(), closer);
      std::vector<std::size_t> votes(classes, 0);
      std::vector<double> summed(classes, 0.0);
      for (std::size_t j = 0; j < k; ++j) {
        const int y = train_.labels[order[j]];
        ++votes[y];
        summed[y] += std::sqrt(dq[order[j]]);
      }
      std::size_t best = 0;
      for (std::size_t c = 1; c < classes; ++c) {
        if (votes[c] > votes[best] || (votes[c] == votes[best] && votes[c] > 0 &&
                                       summed[c] < summed[best]))
          best = c;
      }
      out[start + q] = static_cast<int>(best);
    }
  }
  return out;
}

void Knn::SaveState(nnet::Checkpoint& ckpt) const {
  ckpt.Add("knn.x", {train_.rows(), train_.dim}, train_.values);
  ckpt.Add("knn.y", Shape1(train_.labels.size()),
           std::vector<double>(train_.labels.begin(), train_.labels.end()));
}

void Knn::LoadState(const nnet::Checkpoint& ckpt) {
  const auto& x = ckpt.Get("knn.x");
  train_.dim = dim_;
  train_.values = x.values;
  train_.labels = LabelsFrom(ckpt.Get("knn.y"));
  if (train_.labels.size() != train_.rows())
    throw Error(ErrorCode::kBadShape, "knn state size mismatch");
}

// ----- Gaussian naive Bayes -----

void GaussianNb::FitScaled(const FeatureMatrix& train) {
  const std::size_t c_n = config_.classes, d = train.dim, n = train.rows();
  std::vector<std::size_t> count(c_n, 0);
  mean_.assign(c_n * d, 0.0);
  var_.assign(c_n * d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = train.labels[i];
    ++count[y];
    for (std::size_t k = 0; k < d; ++k) mean_[y * d + k] += train.row(i)[k];
  }
  for (std::size_t c = 0; c < c_n; ++c) {
    if (count[c] == 0)
      throw Error(ErrorCode::kClassAbsent, "class " + std::to_string(c) + " has no training samples");
    for (std::size_t k = 0; k < d; ++k) mean_[c * d + k] /= static_cast<double>(count[c]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const int y = train.labels[i];
    for (std::size_t k = 0; k < d; ++k) {
      const double e = train.row(i)[k] - mean_[y * d + k];
      var_[y * d + k] += e * e;
    }
  }

  // Smoothing scales with the widest feature of the whole training set.
  double max_var = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    double m = 0.0, v = 0.0;
    for (std::size_t i = 0; i < n; ++i) m += train.row(i)[k];
    m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) v += (train.row(i)[k] - m) * (train.row(i)[k] - m);
    max_var = std::max(max_var, v / static_cast<double>(n));
  }
  double eps = config_.gnb_var_smoothing * max_var;
  if (!(eps > 0.0)) eps = config_.gnb_var_smoothing > 0.0 ? config_.gnb_var_smoothing : 1e-9;

  log_prior_.assign(c_n, 0.0);
  for (std::size_t c = 0; c < c_n; ++c) {
    log_prior_[c] = std::log(static_cast<double>(count[c]) / static_cast<double>(n));
    for (std::size_t k = 0; k < d; ++k)
      var_[c * d + k] = var_[c * d + k] / static_cast<double>(count[c]) + eps;
  }
}

std::vector<double> GaussianNb::JointLogLikelihood(const double* row) const {
  const std::size_t c_n = config_.classes, d = dim_;
  std::vector<double> jll(c_n);
  for (std::size_t c = 0; c < c_n; ++c) {
    double s = log_prior_[c];
    for (std::size_t k = 0; k < d; ++k) {
      const double v = var_[c * d + k];
      const double e = row[k] - mean_[c * d + k];
      s -= 0.5 * (std::log(2.0 * std::numbers::pi * v) + e * e / v);
    }
    jll[c] = s;
  }
  return jll;
}

std::vector<int> GaussianNb::PredictScaled(const FeatureMatrix& x) const {
  std::vector<int> out(x.rows());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < static_cast<Index>(x.rows()); ++i) {
    const auto jll = JointLogLikelihood(x.row(i));
    out[i] = ArgmaxLowestTie(jll.data(), jll.size());
  }
  return out;
}

std::vector<double> GaussianNb::PredictProba(const FeatureMatrix& x) const {
  if (!fitted_) throw Error(ErrorCode::kUnfitted, "gnb has not been fitted");
  const FeatureMatrix z = scaler_.Apply(x);
  const std::size_t c_n = config_.classes;
  std::vector<double> out(z.rows() * c_n);
  for (std::size_t i = 0; i < z.rows(); ++i) {
    const auto jll = JointLogLikelihood(z.row(i));
    const double m = *std::max_element(jll.begin(), jll.end());
    double denom = 0.0;
    for (double v : jll) denom += std::exp(v - m);
    for (std::size_t c = 0; c < c_n; ++c) out[i * c_n + c] = std::exp(jll[c] - m) / denom;
  }
  return out;
}

void GaussianNb::SaveState(nnet::Checkpoint& ckpt) const {
  ckpt.Add("gnb.log_prior", Shape1(log_prior_.size()), log_prior_);
  ckpt.Add("gnb.mean", {config_.classes, dim_}, mean_);
  ckpt.Add("gnb.var", {config_.classes, dim_}, var_);
}

void GaussianNb::LoadState(const nnet::Checkpoint& ckpt) {
  log_prior_ = ckpt.Get("gnb.log_prior").values;
  mean_ = ckpt.Get("gnb.mean").values;
  var_ = ckpt.Get("gnb.var").values;
  if (log_prior_.size() != config_.classes || mean_.size() != config_.classes * dim_ ||
      var_.size() != mean_.size())
    throw Error(ErrorCode::kBadShape, "gnb state size mismatch");
}

// ----- linear SVM -----

double BinarySvm::Decision(const double* x) const {
  double s = b;
  for (std::size_t k = 0; k < w.size(); ++k) s += w[k] * x[k];
  return s;
}

BinarySvm TrainBinarySvm(const FeatureMatrix& x, std::span<const int> y, double c,
                         std::size_t epochs, std::uint64_t seed) {
  const std::size_t n = x.rows(), d = x.dim;
  if (n == 0 || y.size() != n) throw Error(ErrorCode::kLengthMismatch, "svm targets");
  if (!(c > 0.0) || epochs == 0) throw Error(ErrorCode::kBadConfig, "svm needs C > 0, epochs >= 1");
  const double lambda = 1.0 / (c * static_cast<double>(n));

  std::vector<double> w(d, 0.0), avg(d, 0.0);
  double b = 0.0, avg_b = 0.0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::size_t t = 0;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const bool last = epoch + 1 == epochs;
    for (std::size_t i : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const double* xi = x.row(i);
      double margin = b;
      for (std::size_t k = 0; k < d; ++k) margin += w[k] * xi[k];
      margin *= y[i];
      const double shrink = 1.0 - 1.0 / static_cast<double>(t);
      for (auto& v : w) v *= shrink;
      b *= shrink;
      if (margin < 1.0) {
        const double step = eta * y[i];
        for (std::size_t k = 0; k < d; ++k) w[k] += step * xi[k];
        b += step;
      }
      if (last) {
        for (std::size_t k = 0; k < d; ++k) avg[k] += w[k];
        avg_b += b;
      }
    }
  }
  for (auto& v : avg) v /= static_cast<double>(n);
  return {std::move(avg), avg_b / static_cast<double>(n)};
}

void LinearSvm::FitScaled(const FeatureMatrix& train) {
  const std::size_t c_n = config_.classes;
  std::vector<bool> present(c_n, false);
  for (int y : train.labels) present[y] = true;
  if (std::count(present.begin(), present.end(), true) < 2)
    throw Error(ErrorCode::kSingleClass, "svm needs at least two classes in training");
  machines_.assign(c_n, {});
#pragma omp parallel for schedule(dynamic)
  for (Index c = 0; c < static_cast<Index>(c_n); ++c) {
    std::vector<int> target(train.rows());
    for (std::size_t i = 0; i < target.size(); ++i) target[i] = train.labels[i] == c ? 1 : -1;
    machines_[c] = TrainBinarySvm(train, target, config_.svm_c, config_.svm_epochs,
                                  config_.seed + static_cast<std::uint64_t>(c));
  }
}

std::vector<int> LinearSvm::PredictScaled(const FeatureMatrix& x) const {
  std::vector<int> out(x.rows());
  const std::size_t c_n = machines_.size();
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < static_cast<Index>(x.rows()); ++i) {
    std::vector<double> score(c_n);
    for (std::size_t c = 0; c < c_n; ++c) score[c] = machines_[c].Decision(x.row(i));
    out[i] = ArgmaxLowestTie(score.data(), c_n);
  }
  return out;
}

void LinearSvm::SaveState(nnet::Checkpoint& ckpt) const {
  std::vector<double> w, b;
  for (const auto& m : machines_) {
    w.insert(w.end(), m.w.begin(), m.w.end());
    b.push_back(m.b);
  }
  const std::size_t n = b.size();
  ckpt.Add("svm.weight", {n, dim_}, std::move(w));
  ckpt.Add("svm.bias", Shape1(n), std::move(b));
}

void LinearSvm::LoadState(const nnet::Checkpoint& ckpt) {
  const auto& w = ckpt.Get("svm.weight").values;
  const auto& b = ckpt.Get("svm.bias").values;
  if (b.size() != config_.classes || w.size() != b.size() * dim_)
    throw Error(ErrorCode::kBadShape, "svm state size mismatch");
  machines_.assign(b.size(), {});
  for (std::size_t c = 0; c < b.size(); ++c) {
    machines_[c].w.assign(w.begin() + static_cast<Index>(c * dim_),
                          w.begin() + static_cast<Index>((c + 1) * dim_));
    machines_[c].b = b[c];
  }
}

// ----- factory -----

bool IsClassicKind(const std::string& kind) {
  return kind == "knn" || kind == "gnb" || kind == "svm";
}

std::unique_ptr<Classifier> MakeClassifier(const std::string& kind, ClassicConfig config) {
  if (kind == "knn") return std::make_unique<Knn>(config);
  if (kind == "gnb") return std::make_unique<GaussianNb>(config);
  if (kind == "svm") return std::make_unique<LinearSvm>(config);
  throw Error(ErrorCode::kBadConfig, "unknown classifier '" + kind + "'");
}

std::unique_ptr<Classifier> LoadClassifier(const nnet::Checkpoint& ckpt) {
  std::unique_ptr<Classifier> model;
  try {
    const json meta = json::parse(ckpt.meta);
    ClassicConfig cfg;
    cfg.classes = meta.at("classes").get<std::size_t>();
    cfg.standardize = meta.at("standardize").get<bool>();
    cfg.knn_k = meta.at("knn_k").get<std::size_t>();
    cfg.gnb_var_smoothing = meta.at("gnb_var_smoothing").get<double>();
    cfg.svm_c = meta.at("svm_c").get<double>();
    cfg.svm_epochs = meta.at("svm_epochs").get<std::size_t>();
    cfg.seed = ckpt.seed;
    model = MakeClassifier(meta.at("model").get<std::string>(), cfg);
    model->dim_ = meta.at("dim").get<std::size_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBadConfig, std::string("classifier meta: ") + e.what());
  }
  model->scaler_.enabled = model->config_.standardize;
  model->scaler_.mean = ckpt.Get("scaler.mean").values;
  model->scaler_.scale = ckpt.Get("scaler.scale").values;
  if (model->scaler_.mean.size() != model->dim_ || model->scaler_.scale.size() != model->dim_)
    throw Error(ErrorCode::kBadShape, "scaler size mismatch");
  model->LoadState(ckpt);
  model->fitted_ = true;
  return model;
}

}  // namespace stutter::classic
