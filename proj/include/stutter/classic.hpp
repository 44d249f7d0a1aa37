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

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "stutter/labels.hpp"
#include "stutter/nnet/checkpoint.hpp"

namespace stutter::classic {

// Row-major pooled feature vectors with labels (labels may be empty for
// prediction-only sets).
struct FeatureMatrix {
  std::size_t dim = 0;
  std::vector<double> values;
  std::vector<int> labels;

  std::size_t rows() const { return dim == 0 ? 0 : values.size() / dim; }
  const double* row(std::size_t i) const { return values.data() + i * dim; }
  void Append(std::span<const double> x, int label);
};

// Per-feature (x - mean) / std with population std; constant features get
// scale 1. Disabled instances pass rows through unchanged.
struct Standardizer {
  bool enabled = true;
  std::vector<double> mean;
  std::vector<double> scale;

  void Fit(const FeatureMatrix& x);
  FeatureMatrix Apply(const FeatureMatrix& x) const;
};

struct ClassicConfig {
  std::size_t classes = kNumClasses;
  bool standardize = true;
  std::size_t knn_k = 5;
  double gnb_var_smoothing = 1e-9;
  double svm_c = 1.0;
  std::size_t svm_epochs = 20;
  std::uint64_t seed = 0;
};

class Classifier {
 public:
  explicit Classifier(ClassicConfig config) : config_(config) {}
  virtual ~Classifier() = default;

  virtual std::string kind() const = 0;
  void Fit(const FeatureMatrix& train);
  // Throws Error(kUnfitted) before Fit and Error(kBadShape) on a dim mismatch.
  std::vector<int> Predict(const FeatureMatrix& x) const;

  nnet::Checkpoint ToCheckpoint() const;

  bool fitted() const { return fitted_; }
  const ClassicConfig& config() const { return config_; }
  const Standardizer& standardizer() const { return scaler_; }

 protected:
  virtual void FitScaled(const FeatureMatrix& train) = 0;
  virtual std::vector<int> PredictScaled(const FeatureMatrix& x) const = 0;
  virtual void SaveState(nnet::Checkpoint& ckpt) const = 0;
  virtual void LoadState(const nnet::Checkpoint& ckpt) = 0;

  ClassicConfig config_;
  Standardizer scaler_;
  std::size_t dim_ = 0;
  bool fitted_ = false;

  friend std::unique_ptr<Classifier> LoadClassifier(const nnet::Checkpoint& ckpt);
};

// Exact k-nearest-neighbour vote under Euclidean distance. The k nearest are
// taken by (distance, training index); vote ties go to the smaller summed
// distance, then the smaller class id.
class Knn : public Classifier {
 public:
  explicit Knn(ClassicConfig config = {}) : Classifier(config) {}
  std::string kind() const override { return "knn"; }

 protected:
  void FitScaled(const FeatureMatrix& train) override;
  std::vector<int> PredictScaled(const FeatureMatrix& x) const override;
  void SaveState(nnet::Checkpoint& ckpt) const override;
  void LoadState(const nnet::Checkpoint& ckpt) override;

 private:
  FeatureMatrix train_;
};

// Gaussian naive Bayes. Every class must appear at fit (Error(kClassAbsent)).
// Variances are smoothed by var_smoothing times the largest feature variance
// of the training set.
class GaussianNb : public Classifier {
 public:
  explicit GaussianNb(ClassicConfig config = {}) : Classifier(config) {}
  std::string kind() const override { return "gnb"; }

  // [rows][classes] posteriors, each row normalized to sum to one.
  std::vector<double> PredictProba(const FeatureMatrix& x) const;
  // Unnormalized log prior + log likelihood for one standardized row.
  std::vector<double> JointLogLikelihood(const double* row) const;

  const std::vector<double>& log_prior() const { return log_prior_; }
  const std::vector<double>& means() const { return mean_; }     // [classes][dim]
  const std::vector<double>& variances() const { return var_; }  // [classes][dim]

 protected:
  void FitScaled(const FeatureMatrix& train) override;
  std::vector<int> PredictScaled(const FeatureMatrix& x) const override;
  void SaveState(nnet::Checkpoint& ckpt) const override;
  void LoadState(const nnet::Checkpoint& ckpt) override;

 private:
  std::vector<double> log_prior_, mean_, var_;
};

// One binary linear machine: sign(w . x + b).
struct BinarySvm {
  std::vector<double> w;
  double b = 0.0;

  double Decision(const double* x) const;
};

// L2-regularized hinge loss minimized by stochastic subgradient steps of
// size 1/(lambda t), lambda = 1/(C n). The bias is handled as a weight on a
// constant input. Each epoch visits a seeded permutation; the returned
// machine is the average of the iterates over the final epoch. `y` holds
// +1/-1 targets.
BinarySvm TrainBinarySvm(const FeatureMatrix& x, std::span<const int> y, double c,
                         std::size_t epochs, std::uint64_t seed);

// One-vs-rest linear SVM: machine k separates class k from the rest and is
// trained with seed + k; prediction is the argmax decision value (ties to the
// smaller class id).
class LinearSvm : public Classifier {
 public:
  explicit LinearSvm(ClassicConfig config = {}) : Classifier(config) {}
  std::string kind() const override { return "svm"; }

  const std::vector<BinarySvm>& machines() const { return machines_; }

 protected:
  void FitScaled(const FeatureMatrix& train) override;
  std::vector<int> PredictScaled(const FeatureMatrix& x) const override;
  void SaveState(nnet::Checkpoint& ckpt) const override;
  void LoadState(const nnet::Checkpoint& ckpt) override;

 private:
  std::vector<BinarySvm> machines_;
};

// kind is one of "knn", "gnb", "svm".
std::unique_ptr<Classifier> MakeClassifier(const std::string& kind, ClassicConfig config = {});
bool IsClassicKind(const std::string& kind);
std::unique_ptr<Classifier> LoadClassifier(const nnet::Checkpoint& ckpt);

}  // namespace stutter::classic
