// Copyright 2026 The DIPPM Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dippm/gnn.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "dippm/error.h"
#include "json.hpp"

namespace dippm {
namespace {

using Json = nlohmann::ordered_json;

constexpr double kMinStd = 1e-12;
constexpr std::string_view kTargetTransform = "log";

// Predecessor lists under producer->consumer edges.
std::vector<std::vector<int>> Predecessors(const GraphEncoding& encoding) {
  std::vector<std::vector<int>> preds(static_cast<size_t>(encoding.num_nodes));
  for (const auto& [src, dst] : encoding.edges) preds[static_cast<size_t>(dst)].push_back(src);
  return preds;
}

Matrix NeighbourMean(const std::vector<std::vector<int>>& preds, const Matrix& h) {
  Matrix agg(h.rows(), h.cols());
  for (int v = 0; v < h.rows(); ++v) {
    const auto& nv = preds[static_cast<size_t>(v)];
    if (nv.empty()) continue;
    auto dst = agg.row(v);
    for (int u : nv) {
      auto src = h.row(u);
      for (size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
    }
    const double inv = 1.0 / static_cast<double>(nv.size());
    for (double& x : dst) x *= inv;
  }
  return agg;
}

// Adjoint of NeighbourMean: out[u] += g[v] / |N(v)| for every u in N(v).
void NeighbourMeanBackward(const std::vector<std::vector<int>>& preds, const Matrix& g,
                           Matrix& out) {
  for (int v = 0; v < g.rows(); ++v) {
    const auto& nv = preds[static_cast<size_t>(v)];
    if (nv.empty()) continue;
    const double inv = 1.0 / static_cast<double>(nv.size());
    auto src = g.row(v);
    for (int u : nv) {
      auto dst = out.row(u);
      for (size_t j = 0; j < dst.size(); ++j) dst[j] += src[j] * inv;
    }
  }
}

Matrix SagePreActivation(const std::vector<std::vector<int>>& preds,
                         const SageLayerParams& layer, const Matrix& h, Matrix* agg_out) {
  Matrix agg = NeighbourMean(preds, h);
  Matrix pre = MatMul(h, layer.w_self);
  Matrix neigh = MatMul(agg, layer.w_neigh);
  auto p = pre.data();
  auto q = neigh.data();
  for (size_t i = 0; i < p.size(); ++i) p[i] += q[i];
  AddRowInPlace(pre, layer.bias);
  if (agg_out) *agg_out = std::move(agg);
  return pre;
}

// Zeroes entries of `grad` where the ReLU input was not positive.
void ReluBackwardInPlace(Matrix& grad, const Matrix& pre_activation) {
  auto g = grad.data();
  auto a = pre_activation.data();
  for (size_t i = 0; i < g.size(); ++i) {
    if (!(a[i] > 0.0)) g[i] = 0.0;
  }
}

void MultiplyInPlace(Matrix& a, const Matrix& b) {
  auto x = a.data();
  auto y = b.data();
  for (size_t i = 0; i < x.size(); ++i) x[i] *= y[i];
}

void AddInPlace(Matrix& a, const Matrix& b) {
  auto x = a.data();
  auto y = b.data();
  for (size_t i = 0; i < x.size(); ++i) x[i] += y[i];
}

Matrix GlorotUniform(int fan_in, int fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Matrix w(fan_in, fan_out);
  for (double& v : w.data()) v = rng.Uniform(-limit, limit);
  return w;
}

// Everything the backward pass needs from one forward pass.
struct ForwardTrace {
  std::vector<std::vector<int>> preds;
  std::vector<Matrix> h;    // h[0] = X, h[l + 1] = ReLU(pre[l])
  std::vector<Matrix> agg;  // neighbour means of h[l]
  std::vector<Matrix> pre;
  std::array<Matrix, kNumDenseLayers> fc_in;  // input of each fc block
  std::array<Matrix, kNumDenseLayers - 1> fc_pre;
  std::array<Matrix, kNumDenseLayers - 1> mask;
  Matrix out;
};

void RunForward(const GraphEncoding* encoding, const StaticFeatures& fs, const DippmModel& model,
                Mode mode, Rng* rng, ForwardTrace& trace) {
  if (mode == Mode::kTrain && model.dropout_p > 0.0 && rng == nullptr) {
    Fail(ErrorCode::kInvalidArgument, "training-mode forward needs an rng");
  }
  Matrix fs_row = model.normalizer.NormalizeStatic(fs);
  if (model.arch == ModelArch::kSage) {
    if (encoding == nullptr || encoding->num_nodes < 1) {
      Fail(ErrorCode::kEmptyGraph, "graph encoding has no nodes");
    }
    trace.preds = Predecessors(*encoding);
    trace.h.assign(1, FeatureMatrix(*encoding));
    trace.agg.clear();
    trace.pre.clear();
    for (const auto& layer : model.sage) {
      trace.agg.emplace_back();
      trace.pre.push_back(SagePreActivation(trace.preds, layer, trace.h.back(), &trace.agg.back()));
      trace.h.push_back(Relu(trace.pre.back()));
    }
    Matrix readout = ReadoutMean(trace.h.back());
    Matrix concat(1, readout.cols() + kStaticFeatureWidth);
    std::copy(readout.data().begin(), readout.data().end(), concat.data().begin());
    std::copy(fs_row.data().begin(), fs_row.data().end(),
              concat.data().begin() + readout.cols());
    trace.fc_in[0] = std::move(concat);
  } else {
    trace.fc_in[0] = std::move(fs_row);
  }
  for (int k = 0; k < kNumDenseLayers; ++k) {
    const auto& layer = model.fc[static_cast<size_t>(k)];
    Matrix a = MatMul(trace.fc_in[static_cast<size_t>(k)], layer.weight);
    AddRowInPlace(a, layer.bias);
    if (k == kNumDenseLayers - 1) {
      trace.out = std::move(a);
      break;
    }
    Matrix act = Relu(a);
    Matrix mask = mode == Mode::kTrain ? DropoutMask(1, act.cols(), model.dropout_p, *rng)
                                       : Matrix(1, act.cols(), 1.0);
    MultiplyInPlace(act, mask);
    trace.fc_pre[static_cast<size_t>(k)] = std::move(a);
    trace.mask[static_cast<size_t>(k)] = std::move(mask);
    trace.fc_in[static_cast<size_t>(k) + 1] = std::move(act);
  }
}

// Accumulates d(loss)/d(params) into `grads` given d(loss)/d(out).
void RunBackward(const DippmModel& model, const ForwardTrace& trace, const Matrix& d_out,
                 std::vector<Matrix>& grads) {
  const size_t fc_base = model.sage.size() * 3;
  Matrix d = d_out;
  for (int k = kNumDenseLayers - 1; k >= 0; --k) {
    const auto ku = static_cast<size_t>(k);
    if (k < kNumDenseLayers - 1) {
      MultiplyInPlace(d, trace.mask[ku]);
      ReluBackwardInPlace(d, trace.fc_pre[ku]);
    }
    AccumulateMatMulTransposeA(trace.fc_in[ku], d, grads[fc_base + 2 * ku]);
    AddInPlace(grads[fc_base + 2 * ku + 1], d);
    if (k > 0 || model.arch == ModelArch::kSage) {
      d = MatMulTransposeB(d, model.fc[ku].weight);
    }
  }
  if (model.arch != ModelArch::kSage) return;

  // d now holds the gradient of the concatenated [readout, fs] row.
  const Matrix& last = trace.h.back();
  const int n = last.rows();
  Matrix d_h(n, last.cols());
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int v = 0; v < n; ++v) {
    auto row = d_h.row(v);
    for (int j = 0; j < last.cols(); ++j) row[static_cast<size_t>(j)] = d(0, j) * inv_n;
  }
  for (int l = static_cast<int>(model.sage.size()) - 1; l >= 0; --l) {
    const auto lu = static_cast<size_t>(l);
    ReluBackwardInPlace(d_h, trace.pre[lu]);
    AccumulateMatMulTransposeA(trace.h[lu], d_h, grads[3 * lu]);
    AccumulateMatMulTransposeA(trace.agg[lu], d_h, grads[3 * lu + 1]);
    AddInPlace(grads[3 * lu + 2], ColumnSums(d_h));
    if (l == 0) break;
    Matrix d_prev = MatMulTransposeB(d_h, model.sage[lu].w_self);
    Matrix d_agg = MatMulTransposeB(d_h, model.sage[lu].w_neigh);
    NeighbourMeanBackward(trace.preds, d_agg, d_prev);
    d_h = std::move(d_prev);
  }
}

Matrix TargetRow(const std::array<double, kNumTargets>& z) {
  return Matrix(1, kNumTargets, std::vector<double>(z.begin(), z.end()));
}

Json MatrixToJson(const Matrix& m) {
  Json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  j["data"] = std::vector<double>(m.data().begin(), m.data().end());
  return j;
}

template <size_t N>
std::array<double, N> ArrayFromJson(const Json& j, const char* key) {
  const Json& arr = j.at(key);
  if (!arr.is_array() || arr.size() != N) {
    Fail(ErrorCode::kIoFailure, std::string("normalizer.") + key + " has wrong length");
  }
  std::array<double, N> out{};
  for (size_t i = 0; i < N; ++i) out[i] = arr[i].get<double>();
  return out;
}

template <size_t N>
void RequirePositive(const std::array<double, N>& values, const char* what) {
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      Fail(ErrorCode::kIoFailure, std::string(what) + " must be positive and finite");
    }
  }
}

}  // namespace

std::string_view ModelArchName(ModelArch arch) {
  return arch == ModelArch::kSage ? "sage" : "mlp";
}

std::optional<ModelArch> ModelArchFromName(std::string_view name) {
  if (name == "sage") return ModelArch::kSage;
  if (name == "mlp") return ModelArch::kMlp;
  return std::nullopt;
}

Normalizer Normalizer::Fit(std::span<const DatasetRecord> records) {
  if (records.empty()) Fail(ErrorCode::kEmptyDataset, "cannot fit normalizer on zero records");
  Normalizer norm;
  const auto n = static_cast<double>(records.size());
  std::array<double, kNumTargets> t_sum{}, t_sq{};
  std::array<double, kStaticFeatureWidth> f_sum{}, f_sq{};
  for (const auto& r : records) {
    const auto y = r.target.AsArray();
    const auto f = r.fs.AsVector();
    for (size_t i = 0; i < y.size(); ++i) {
      const double v = std::log(y[i]);
      t_sum[i] += v;
      t_sq[i] += v * v;
    }
    for (size_t i = 0; i < f.size(); ++i) {
      f_sum[i] += f[i];
      f_sq[i] += f[i] * f[i];
    }
  }
  auto finish = [n](double sum, double sq, double& mean, double& stddev) {
    mean = sum / n;
    const double var = std::max(0.0, sq / n - mean * mean);
    stddev = std::sqrt(var);
    if (!(stddev > kMinStd)) stddev = 1.0;
  };
  for (size_t i = 0; i < kNumTargets; ++i) finish(t_sum[i], t_sq[i], norm.target_mean[i], norm.target_std[i]);
  for (size_t i = 0; i < kStaticFeatureWidth; ++i) finish(f_sum[i], f_sq[i], norm.fs_mean[i], norm.fs_std[i]);
  return norm;
}

std::array<double, kNumTargets> Normalizer::NormalizeTarget(const TargetVector& y) const {
  const auto v = y.AsArray();
  std::array<double, kNumTargets> z{};
  for (size_t i = 0; i < z.size(); ++i) z[i] = (std::log(v[i]) - target_mean[i]) / target_std[i];
  return z;
}

TargetVector Normalizer::DenormalizeTarget(const std::array<double, kNumTargets>& z) const {
  std::array<double, kNumTargets> y{};
  for (size_t i = 0; i < y.size(); ++i) y[i] = std::exp(z[i] * target_std[i] + target_mean[i]);
  return TargetVector::FromArray(y);
}

Matrix Normalizer::NormalizeStatic(const StaticFeatures& fs) const {
  const auto f = fs.AsVector();
  Matrix row(1, kStaticFeatureWidth);
  for (int i = 0; i < kStaticFeatureWidth; ++i) {
    const auto iu = static_cast<size_t>(i);
    row(0, i) = (f[iu] - fs_mean[iu]) / fs_std[iu];
  }
  return row;
}

std::vector<Matrix*> DippmModel::Parameters() {
  std::vector<Matrix*> out;
  for (auto& l : sage) out.insert(out.end(), {&l.w_self, &l.w_neigh, &l.bias});
  for (auto& l : fc) out.insert(out.end(), {&l.weight, &l.bias});
  return out;
}

std::vector<const Matrix*> DippmModel::Parameters() const {
  std::vector<const Matrix*> out;
  for (const auto& l : sage) out.insert(out.end(), {&l.w_self, &l.w_neigh, &l.bias});
  for (const auto& l : fc) out.insert(out.end(), {&l.weight, &l.bias});
  return out;
}

std::vector<std::string> DippmModel::ParameterNames() const {
  std::vector<std::string> names;
  for (size_t i = 0; i < sage.size(); ++i) {
    const std::string p = "sage" + std::to_string(i) + ".";
    names.insert(names.end(), {p + "w_self", p + "w_neigh", p + "bias"});
  }
  for (size_t i = 0; i < fc.size(); ++i) {
    const std::string p = "fc" + std::to_string(i) + ".";
    names.insert(names.end(), {p + "weight", p + "bias"});
  }
  return names;
}

DippmModel InitModel(ModelArch arch, int hidden, uint64_t seed) {
  if (hidden < 1) Fail(ErrorCode::kInvalidArgument, "hidden width must be positive");
  DippmModel model;
  model.arch = arch;
  model.hidden = hidden;
  Rng rng(seed, /*stream=*/0x400);
  int fc_in = kStaticFeatureWidth;
  if (arch == ModelArch::kSage) {
    int d_in = kNodeFeatureWidth;
    for (int l = 0; l < kNumSageLayers; ++l) {
      SageLayerParams layer;
      layer.w_self = GlorotUniform(d_in, hidden, rng);
      layer.w_neigh = GlorotUniform(d_in, hidden, rng);
      layer.bias = Matrix(1, hidden);
      model.sage.push_back(std::move(layer));
      d_in = hidden;
    }
    fc_in += hidden;
  }
  const std::array<int, kNumDenseLayers> widths = {hidden, hidden, kNumTargets};
  for (int width : widths) {
    model.fc.push_back({GlorotUniform(fc_in, width, rng), Matrix(1, width)});
    fc_in = width;
  }
  return model;
}

Matrix FeatureMatrix(const GraphEncoding& encoding) {
  Matrix x(encoding.num_nodes, kNodeFeatureWidth);
  for (int v = 0; v < encoding.num_nodes; ++v) {
    const auto& f = encoding.features[static_cast<size_t>(v)];
    std::copy(f.begin(), f.end(), x.row(v).begin());
  }
  return x;
}

Matrix SageForward(const GraphEncoding& encoding, const SageLayerParams& layer,
                   const Matrix& h_in) {
  if (h_in.rows() != encoding.num_nodes) {
    Fail(ErrorCode::kShapeMismatch, "embedding rows differ from node count");
  }
  return Relu(SagePreActivation(Predecessors(encoding), layer, h_in, nullptr));
}

Matrix ReadoutMean(const Matrix& z) {
  if (z.rows() < 1) Fail(ErrorCode::kEmptyGraph, "readout over zero nodes");
  return ColumnMeans(z);
}

std::array<double, kNumTargets> Forward(const GraphEncoding& encoding, const StaticFeatures& fs,
                                        const DippmModel& model, Mode mode, Rng* rng) {
  ForwardTrace trace;
  RunForward(&encoding, fs, model, mode, rng, trace);
  return {trace.out(0, 0), trace.out(0, 1), trace.out(0, 2)};
}

TargetVector Predict(const DippmModel& model, const GraphEncoding& encoding,
                     const StaticFeatures& fs) {
  return model.normalizer.DenormalizeTarget(Forward(encoding, fs, model, Mode::kEval));
}

std::vector<TargetVector> PredictAll(const DippmModel& model,
                                     std::span<const DatasetRecord> records) {
  std::vector<TargetVector> preds;
  preds.reserve(records.size());
  for (const auto& r : records) preds.push_back(Predict(model, r.encoding, r.fs));
  return preds;
}

Gradients Backward(std::span<const DatasetRecord> batch, const DippmModel& model, Mode mode,
                   Rng* rng, double huber_delta) {
  if (batch.empty()) Fail(ErrorCode::kEmptyDataset, "gradient of an empty batch");
  Gradients result;
  for (const Matrix* p : model.Parameters()) result.grads.emplace_back(p->rows(), p->cols());
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  ForwardTrace trace;
  for (const auto& record : batch) {
    RunForward(&record.encoding, record.fs, model, mode, rng, trace);
    LossAndGrad lg = HuberLoss(trace.out, TargetRow(model.normalizer.NormalizeTarget(record.target)),
                               huber_delta);
    result.loss += lg.loss * inv_b;
    RunBackward(model, trace, Scale(lg.grad, inv_b), result.grads);
  }
  return result;
}

MapeResult Evaluate(const DippmModel& model, std::span<const DatasetRecord> records) {
  if (records.empty()) Fail(ErrorCode::kEmptyDataset, "evaluation over zero records");
  std::vector<TargetVector> actuals;
  actuals.reserve(records.size());
  for (const auto& r : records) actuals.push_back(r.target);
  return Mape(PredictAll(model, records), actuals);
}

namespace {

struct ValidationStats {
  double mape = 0.0;
  double loss = 0.0;
};

ValidationStats Validate(const DippmModel& model, std::span<const DatasetRecord> records,
                         double huber_delta) {
  const double inv_n = 1.0 / static_cast<double>(records.size());
  std::vector<TargetVector> preds, actuals;
  preds.reserve(records.size());
  actuals.reserve(records.size());
  ValidationStats stats;
  ForwardTrace trace;
  for (const auto& r : records) {
    RunForward(&r.encoding, r.fs, model, Mode::kEval, nullptr, trace);
    stats.loss += HuberLoss(trace.out, TargetRow(model.normalizer.NormalizeTarget(r.target)),
                            huber_delta)
                      .loss *
                  inv_n;
    preds.push_back(
        model.normalizer.DenormalizeTarget({trace.out(0, 0), trace.out(0, 1), trace.out(0, 2)}));
    actuals.push_back(r.target);
  }
  stats.mape = Mape(preds, actuals).overall;
  return stats;
}

}  // namespace

TrainResult Train(std::span<const DatasetRecord> train, std::span<const DatasetRecord> val,
                  const TrainConfig& config, const EpochCallback& on_epoch) {
  if (config.epochs < 1) Fail(ErrorCode::kInvalidArgument, "epochs must be at least 1");
  if (!(config.lr > 0.0)) Fail(ErrorCode::kInvalidArgument, "learning rate must be positive");
  if (config.hidden < 1) Fail(ErrorCode::kInvalidArgument, "hidden width must be positive");
  if (train.empty()) Fail(ErrorCode::kEmptyDataset, "training split is empty");

  TrainResult result;
  DippmModel& model = result.model;
  model = InitModel(config.arch, config.hidden, config.seed);
  model.dropout_p = config.dropout_p;
  model.normalizer = Normalizer::Fit(train);

  std::vector<Matrix*> params = model.Parameters();
  std::vector<AdamState> adam;
  for (const Matrix* p : params) adam.push_back(AdamState::ForParameter(*p));
  AdamConfig adam_config;
  adam_config.lr = config.lr;

  Rng shuffle_rng(config.seed, /*stream=*/0x500);
  Rng dropout_rng(config.seed, /*stream=*/0x600);
  std::vector<size_t> order(train.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    if (config.shuffle) shuffle_rng.Shuffle(order);
    double loss_sum = 0.0;
    for (size_t idx : order) {
      Gradients g = Backward(train.subspan(idx, 1), model, Mode::kTrain, &dropout_rng,
                             config.huber_delta);
      if (!std::isfinite(g.loss)) {
        Fail(ErrorCode::kNonFinite, "training loss diverged in epoch " + std::to_string(epoch));
      }
      loss_sum += g.loss;
      for (size_t k = 0; k < params.size(); ++k) {
        AdamStep(*params[k], g.grads[k], adam[k], adam_config);
      }
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(train.size());
    stats.train_mape = Evaluate(model, train).overall;
    if (val.empty()) {
      stats.val_mape = std::numeric_limits<double>::quiet_NaN();
      stats.val_loss = std::numeric_limits<double>::quiet_NaN();
    } else {
      const ValidationStats v = Validate(model, val, config.huber_delta);
      stats.val_mape = v.mape;
      stats.val_loss = v.loss;
    }
    result.history.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  return result;
}

std::string ModelToJson(const DippmModel& model) {
  Json doc;
  doc["vocab_version"] = model.vocab_version;
  doc["arch"] = std::string(ModelArchName(model.arch));
  doc["hidden"] = model.hidden;
  doc["dropout"] = model.dropout_p;
  doc["normalizer"] = {{"target_transform", std::string(kTargetTransform)},
                       {"target_mean", model.normalizer.target_mean},
                       {"target_std", model.normalizer.target_std},
                       {"fs_mean", model.normalizer.fs_mean},
                       {"fs_std", model.normalizer.fs_std}};
  Json params = Json::object();
  const auto names = model.ParameterNames();
  const auto values = model.Parameters();
  for (size_t i = 0; i < names.size(); ++i) params[names[i]] = MatrixToJson(*values[i]);
  doc["params"] = std::move(params);
  return doc.dump();
}

DippmModel ModelFromJson(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    Fail(ErrorCode::kIoFailure, std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    const std::string version = doc.at("vocab_version").get<std::string>();
    if (version != kVocabVersion) {
      Fail(ErrorCode::kVersionMismatch, "model vocabulary '" + version + "' but this build uses '" +
                                            std::string(kVocabVersion) + "'");
    }
    ModelArch arch = ModelArch::kSage;
    if (doc.contains("arch")) {
      auto parsed = ModelArchFromName(doc["arch"].get<std::string>());
      if (!parsed) Fail(ErrorCode::kIoFailure, "unknown model arch");
      arch = *parsed;
    }
    const int hidden = doc.at("hidden").get<int>();
    DippmModel model = InitModel(arch, hidden, 0);
    model.vocab_version = version;
    if (doc.contains("dropout")) model.dropout_p = doc["dropout"].get<double>();
    const Json& norm = doc.at("normalizer");
    if (norm.contains("target_transform") &&
        norm["target_transform"].get<std::string>() != kTargetTransform) {
      Fail(ErrorCode::kIoFailure, "unsupported target transform");
    }
    model.normalizer.target_mean = ArrayFromJson<kNumTargets>(norm, "target_mean");
    model.normalizer.target_std = ArrayFromJson<kNumTargets>(norm, "target_std");
    model.normalizer.fs_mean = ArrayFromJson<kStaticFeatureWidth>(norm, "fs_mean");
    model.normalizer.fs_std = ArrayFromJson<kStaticFeatureWidth>(norm, "fs_std");
    RequirePositive(model.normalizer.target_std, "target_std");
    RequirePositive(model.normalizer.fs_std, "fs_std");

    const Json& params = doc.at("params");
    const auto names = model.ParameterNames();
    auto values = model.Parameters();
    if (params.size() != names.size()) Fail(ErrorCode::kIoFailure, "unexpected parameter count");
    for (size_t i = 0; i < names.size(); ++i) {
      const Json& p = params.at(names[i]);
      const int rows = p.at("rows").get<int>();
      const int cols = p.at("cols").get<int>();
      if (rows != values[i]->rows() || cols != values[i]->cols()) {
        Fail(ErrorCode::kIoFailure, "parameter " + names[i] + " has wrong shape");
      }
      Matrix m(rows, cols, p.at("data").get<std::vector<double>>());
      if (!m.AllFinite()) Fail(ErrorCode::kIoFailure, "parameter " + names[i] + " is not finite");
      *values[i] = std::move(m);
    }
    return model;
  } catch (const Json::exception& e) {
    Fail(ErrorCode::kIoFailure, std::string("malformed model file: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kVersionMismatch || e.code() == ErrorCode::kIoFailure) throw;
    Fail(ErrorCode::kIoFailure, std::string("malformed model file: ") + e.what());
  }
}

void SaveModel(const DippmModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIoFailure, "cannot open '" + path + "' for writing");
  out << ModelToJson(model) << '\n';
  out.flush();
  if (!out) Fail(ErrorCode::kIoFailure, "write to '" + path + "' failed");
}

DippmModel LoadModel(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIoFailure, "cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ModelFromJson(buffer.str());
}

}  // namespace dippm
