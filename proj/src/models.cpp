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

#include "stutter/models.hpp"

#include <algorithm>
#include <random>

#include "json.hpp"
#include "stutter/error.hpp"

namespace stutter::models {
namespace {

using nnet::Mode;
using nnet::Tensor;
using json = nlohmann::ordered_json;

void CheckReceptiveField(const Tensor& x) {
  if (x.rank() != 3) return;
  for (std::size_t b = 0; b < x.batch(); ++b) {
    if (x.lengths[b] < kStutterNetReceptiveField) {
      throw Error(ErrorCode::kContextTooShort,
                  "sample " + std::to_string(b) + " has " + std::to_string(x.lengths[b]) +
                      " frames, need at least " + std::to_string(kStutterNetReceptiveField));
    }
  }
}

void AddTdnnTrunk(nnet::Sequential& seq, std::size_t input_dim, std::size_t channels,
                  std::mt19937_64& rng) {
  std::size_t in = input_dim;
  const auto& contexts = StutterNetContexts();
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    const std::string tag = "tdnn" + std::to_string(i + 1);
    seq.Add<nnet::Tdnn>(tag, in, channels, contexts[i], rng);
    seq.Add<nnet::Relu>(tag + ".relu");
    seq.Add<nnet::BatchNorm>(tag + ".bn", channels);
    in = channels;
  }
  seq.Add<nnet::StatPool>("pool");
}

// FC -> ReLU -> BN [-> Dropout] per hidden width, then the output FC.
void AddFcStack(nnet::Sequential& seq, const std::string& prefix, std::size_t in,
                const std::vector<std::size_t>& hidden, std::size_t out, double dropout,
                std::uint64_t dropout_seed, std::mt19937_64& rng) {
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    const std::string tag = prefix + "fc" + std::to_string(i + 1);
    seq.Add<nnet::Linear>(tag, in, hidden[i], rng);
    seq.Add<nnet::Relu>(tag + ".relu");
    seq.Add<nnet::BatchNorm>(tag + ".bn", hidden[i]);
    if (dropout > 0.0) seq.Add<nnet::Dropout>(tag + ".drop", dropout, dropout_seed + i);
    in = hidden[i];
  }
  seq.Add<nnet::Linear>(prefix + "fc" + std::to_string(hidden.size() + 1), in, out, rng);
}

std::vector<int> RowArgmax(const Tensor& logits) {
  std::vector<int> out(logits.batch());
  const std::size_t c = logits.features();
  for (std::size_t r = 0; r < logits.batch(); ++r) {
    const double* row = logits.values.data() + r * c;
    out[r] = static_cast<int>(std::max_element(row, row + c) - row);
  }
  return out;
}

void ZeroGrads(const std::vector<nnet::Param*>& params) {
  for (auto* p : params) p->ZeroGrad();
}

json SizesJson(const std::vector<std::size_t>& v) { return json(v); }

std::vector<std::size_t> SizesFrom(const json& j) {
  return j.get<std::vector<std::size_t>>();
}

}  // namespace

const std::vector<std::vector<int>>& StutterNetContexts() {
  static const std::vector<std::vector<int>> kContexts = {
      {-2, -1, 0, 1, 2}, {-2, 0, 2}, {-3, 0, 3}, {0}, {0}};
  return kContexts;
}

// ----- NeuralModel -----

nnet::Checkpoint NeuralModel::ToCheckpoint(std::uint64_t seed) {
  nnet::Checkpoint ckpt;
  ckpt.meta = Describe();
  ckpt.seed = seed;
  for (auto* p : Params()) {
    ckpt.Add(p->name, std::vector<std::uint64_t>(p->shape.begin(), p->shape.end()),
             p->value);
  }
  for (auto* b : Buffers()) ckpt.Add(b->name, {b->value.size()}, b->value);
  return ckpt;
}

void NeuralModel::LoadState(const nnet::Checkpoint& ckpt) {
  for (auto* p : Params()) {
    const auto& t = ckpt.Get(p->name);
    if (t.values.size() != p->value.size())
      throw Error(ErrorCode::kBadShape, "size mismatch for " + p->name);
    p->value = t.values;
  }
  for (auto* b : Buffers()) {
    const auto& t = ckpt.Get(b->name);
    if (t.values.size() != b->value.size())
      throw Error(ErrorCode::kBadShape, "size mismatch for " + b->name);
    b->value = t.values;
  }
}

std::size_t NeuralModel::ParameterCount() {
  std::size_t n = 0;
  for (auto* p : Params()) n += p->value.size();
  return n;
}

// ----- SingleBranchNet -----

SingleBranchNet::SingleBranchNet(StutterNetSpec spec, std::size_t input_dim,
                                 std::size_t n_classes, std::uint64_t seed)
    : spec_(std::move(spec)), input_dim_(input_dim), n_classes_(n_classes) {
  if (input_dim == 0 || n_classes < 2 || spec_.channels == 0)
    throw Error(ErrorCode::kBadConfig, "invalid StutterNet dimensions");
  std::mt19937_64 rng(seed);
  AddTdnnTrunk(net_, input_dim_, spec_.channels, rng);
  AddFcStack(net_, "", 2 * spec_.channels, spec_.fc_hidden, n_classes_, 0.0, 0, rng);
}

void SingleBranchNet::SetLoss(LossKind kind, std::optional<std::vector<double>> alpha) {
  if (kind == LossKind::kWeighted) {
    if (!alpha || alpha->size() != n_classes_)
      throw Error(ErrorCode::kBadConfig, "weighted loss needs one weight per class");
    for (double a : *alpha)
      if (!(a > 0.0)) throw Error(ErrorCode::kNonPositiveWeight, "class weight <= 0");
  }
  loss_ = kind;
  alpha_ = kind == LossKind::kWeighted ? std::move(alpha) : std::nullopt;
}

Tensor SingleBranchNet::Logits(const Tensor& x, Mode mode) {
  CheckReceptiveField(x);
  return net_.Forward(x, mode);
}

nnet::LossResult SingleBranchNet::Loss(const Tensor& logits,
                                       std::span<const int> labels) const {
  if (loss_ == LossKind::kWeighted) return nnet::WeightedCrossEntropy(logits, labels, *alpha_);
  return nnet::CrossEntropy(logits, labels);
}

double SingleBranchNet::TrainStep(const nnet::Batch& batch) {
  ZeroGrads(Params());
  const Tensor logits = Logits(batch.inputs, Mode::kTrain);
  nnet::LossResult loss = Loss(logits, batch.labels);
  net_.Backward(loss.grad);
  return loss.value;
}

double SingleBranchNet::EvalLoss(const nnet::Batch& batch) {
  return Loss(Logits(batch.inputs, Mode::kEval), batch.labels).value;
}

std::vector<int> SingleBranchNet::Predict(const Tensor& inputs) {
  return RowArgmax(Logits(inputs, Mode::kEval));
}

std::string SingleBranchNet::Describe() const {
  json j;
  j["model"] = kind();
  j["input_dim"] = input_dim_;
  j["n_classes"] = n_classes_;
  j["channels"] = spec_.channels;
  j["fc_hidden"] = SizesJson(spec_.fc_hidden);
  return j.dump();
}

// ----- MultiBranchNet -----

MultiBranchNet MultiBranchNet::StutterNet(const StutterNetSpec& spec, std::size_t input_dim,
                                          std::uint64_t seed, nnet::DisfluentTarget target) {
  if (input_dim == 0 || spec.channels == 0)
    throw Error(ErrorCode::kBadConfig, "invalid StutterNet dimensions");
  MultiBranchNet m;
  m.shallow_ = false;
  m.input_dim_ = input_dim;
  m.stutternet_spec_ = spec;
  m.options_.target = target;
  std::mt19937_64 rng(seed);
  AddTdnnTrunk(m.encoder_, input_dim, spec.channels, rng);
  const std::size_t pooled = 2 * spec.channels;
  AddFcStack(m.fluent_, "fluent.", pooled, spec.fc_hidden, 2, 0.0, 0, rng);
  const std::size_t d_out =
      target == nnet::DisfluentTarget::kMasked ? kNumDisfluentClasses : kNumClasses;
  AddFcStack(m.disfluent_, "disfluent.", pooled, spec.fc_hidden, d_out, 0.0, 0, rng);
  return m;
}

MultiBranchNet MultiBranchNet::Shallow(const ShallowSpec& spec, std::size_t input_dim,
                                       std::uint64_t seed, nnet::DisfluentTarget target) {
  if (input_dim == 0 || spec.dropout < 0.0 || spec.dropout >= 1.0)
    throw Error(ErrorCode::kBadConfig, "invalid shallow network config");
  MultiBranchNet m;
  m.shallow_ = true;
  m.input_dim_ = input_dim;
  m.shallow_spec_ = spec;
  m.options_.target = target;
  std::mt19937_64 rng(seed);
  AddFcStack(m.fluent_, "fluent.", input_dim, spec.hidden, 2, spec.dropout, seed + 101, rng);
  const std::size_t d_out =
      target == nnet::DisfluentTarget::kMasked ? kNumDisfluentClasses : kNumClasses;
  AddFcStack(m.disfluent_, "disfluent.", input_dim, spec.hidden, d_out, spec.dropout,
             seed + 202, rng);
  return m;
}

void MultiBranchNet::SetLossOptions(nnet::JointLossOptions options) {
  if (options.target != options_.target)
    throw Error(ErrorCode::kBadConfig, "loss target does not match the disfluent head");
  options_ = std::move(options);
}

MultiBranchNet::Outputs MultiBranchNet::Forward(const Tensor& x, Mode mode) {
  Tensor h;
  if (shallow_) {
    if (x.rank() != 2) throw Error(ErrorCode::kBadShape, "shallow network expects pooled input");
    h = x;
  } else {
    CheckReceptiveField(x);
    h = encoder_.Forward(x, mode);
  }
  return {fluent_.Forward(h, mode), disfluent_.Forward(h, mode)};
}

void MultiBranchNet::Backward(const Tensor& fluent_grad, const Tensor& disfluent_grad) {
  Tensor g = fluent_.Backward(fluent_grad);
  const Tensor gd = disfluent_.Backward(disfluent_grad);
  for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] += gd.values[i];
  if (!shallow_) encoder_.Backward(g);
}

double MultiBranchNet::TrainStep(const nnet::Batch& batch) {
  ZeroGrads(Params());
  const Outputs out = Forward(batch.inputs, Mode::kTrain);
  const nnet::JointLossResult loss =
      nnet::JointLoss(out.fluent, out.disfluent, batch.labels, options_);
  Backward(loss.fluent_grad, loss.disfluent_grad);
  return loss.value;
}

double MultiBranchNet::EvalLoss(const nnet::Batch& batch) {
  const Outputs out = Forward(batch.inputs, Mode::kEval);
  return nnet::JointLoss(out.fluent, out.disfluent, batch.labels, options_).value;
}

std::vector<int> MultiBranchNet::Predict(const Tensor& inputs) {
  const Outputs out = Forward(inputs, Mode::kEval);
  const std::size_t cf = out.fluent.features();
  const std::size_t cd = out.disfluent.features();
  std::vector<int> pred(inputs.batch());
  for (std::size_t r = 0; r < pred.size(); ++r) {
    pred[r] = LabelId(MbPredictRule(
        std::span<const double>(out.fluent.values.data() + r * cf, cf),
        std::span<const double>(out.disfluent.values.data() + r * cd, cd)));
  }
  return pred;
}

std::vector<nnet::Param*> MultiBranchNet::Params() {
  std::vector<nnet::Param*> out = encoder_.Params();
  for (auto* p : fluent_.Params()) out.push_back(p);
  for (auto* p : disfluent_.Params()) out.push_back(p);
  return out;
}

std::vector<nnet::Buffer*> MultiBranchNet::Buffers() {
  std::vector<nnet::Buffer*> out = encoder_.Buffers();
  for (auto* b : fluent_.Buffers()) out.push_back(b);
  for (auto* b : disfluent_.Buffers()) out.push_back(b);
  return out;
}

std::string MultiBranchNet::Describe() const {
  json j;
  j["model"] = kind();
  j["input_dim"] = input_dim_;
  j["disfluent_target"] =
      options_.target == nnet::DisfluentTarget::kMasked ? "masked" : "all";
  if (shallow_) {
    j["hidden"] = SizesJson(shallow_spec_.hidden);
    j["dropout"] = shallow_spec_.dropout;
  } else {
    j["channels"] = stutternet_spec_.channels;
    j["fc_hidden"] = SizesJson(stutternet_spec_.fc_hidden);
  }
  return j.dump();
}

Label MbPredictRule(std::span<const double> fluent_logits,
                    std::span<const double> disfluent_logits) {
  if (fluent_logits.size() != 2 || disfluent_logits.size() < kNumDisfluentClasses)
    throw Error(ErrorCode::kBadShape, "unexpected head widths");
  if (fluent_logits[kFluentIndex] >= fluent_logits[kDisfluentIndex])
    return Label::kNoDisfluency;
  const auto first = disfluent_logits.begin();
  const auto best = std::max_element(first, first + kNumDisfluentClasses);
  return LabelFromId(static_cast<int>(best - first));
}

std::unique_ptr<NeuralModel> LoadNeuralModel(const nnet::Checkpoint& ckpt) {
  json j;
  try {
    j = json::parse(ckpt.meta);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBadConfig, std::string("checkpoint meta: ") + e.what());
  }
  std::unique_ptr<NeuralModel> model;
  try {
    const std::string kind = j.at("model").get<std::string>();
    const std::size_t input_dim = j.at("input_dim").get<std::size_t>();
    const auto target = j.value("disfluent_target", "masked") == "masked"
                            ? nnet::DisfluentTarget::kMasked
                            : nnet::DisfluentTarget::kAllSamples;
    if (kind == "sb-stutternet") {
      StutterNetSpec spec{j.at("channels").get<std::size_t>(), SizesFrom(j.at("fc_hidden"))};
      model = std::make_unique<SingleBranchNet>(spec, input_dim,
                                                j.at("n_classes").get<std::size_t>(), ckpt.seed);
    } else if (kind == "mb-stutternet") {
      StutterNetSpec spec{j.at("channels").get<std::size_t>(), SizesFrom(j.at("fc_hidden"))};
      model = std::make_unique<MultiBranchNet>(
          MultiBranchNet::StutterNet(spec, input_dim, ckpt.seed, target));
    } else if (kind == "shallow-mb") {
      ShallowSpec spec{SizesFrom(j.at("hidden")), j.at("dropout").get<double>()};
      model = std::make_unique<MultiBranchNet>(
          MultiBranchNet::Shallow(spec, input_dim, ckpt.seed, target));
    } else {
      throw Error(ErrorCode::kBadConfig, "unknown neural model '" + kind + "'");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBadConfig, std::string("checkpoint meta: ") + e.what());
  }
  model->LoadState(ckpt);
  return model;
}

}  // namespace stutter::models
