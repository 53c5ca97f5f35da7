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

// Performance-model network: three mean-aggregator graphSAGE blocks, a mean
// readout concatenated with the normalized static features, and three fully
// connected blocks regressing (latency, memory, energy). The MLP baseline
// drops the graph branch and feeds the static features alone through the
// same FC stack.

#ifndef DIPPM_GNN_H_
#define DIPPM_GNN_H_

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dippm/dataset.h"
#include "dippm/featurize.h"
#include "dippm/numerics.h"

namespace dippm {

inline constexpr int kNumSageLayers = 3;
inline constexpr int kNumDenseLayers = 3;
inline constexpr int kDefaultHidden = 512;
inline constexpr double kDefaultDropout = 0.05;

enum class ModelArch { kSage, kMlp };

std::string_view ModelArchName(ModelArch arch);
std::optional<ModelArch> ModelArchFromName(std::string_view name);

struct SageLayerParams {
  Matrix w_self;   // d_in x d_out
  Matrix w_neigh;  // d_in x d_out
  Matrix bias;     // 1 x d_out

  bool operator==(const SageLayerParams&) const = default;
};

struct DenseLayerParams {
  Matrix weight;  // d_in x d_out
  Matrix bias;    // 1 x d_out

  bool operator==(const DenseLayerParams&) const = default;
};

/// Targets are standardized in log space, static features (already log1p)
/// are standardized directly. Both are fitted on the training split.
struct Normalizer {
  std::array<double, kNumTargets> target_mean{};
  std::array<double, kNumTargets> target_std{1.0, 1.0, 1.0};
  std::array<double, kStaticFeatureWidth> fs_mean{};
  std::array<double, kStaticFeatureWidth> fs_std{1.0, 1.0, 1.0, 1.0, 1.0};

  static Normalizer Fit(std::span<const DatasetRecord> records);

  std::array<double, kNumTargets> NormalizeTarget(const TargetVector& y) const;
  TargetVector DenormalizeTarget(const std::array<double, kNumTargets>& z) const;
  Matrix NormalizeStatic(const StaticFeatures& fs) const;

  bool operator==(const Normalizer&) const = default;
};

struct DippmModel {
  ModelArch arch = ModelArch::kSage;
  int hidden = kDefaultHidden;
  double dropout_p = kDefaultDropout;
  Normalizer normalizer;
  std::string vocab_version{kVocabVersion};
  std::vector<SageLayerParams> sage;  // empty for the MLP baseline
  std::vector<DenseLayerParams> fc;

  /// Every trainable matrix in a fixed order (sage blocks, then fc blocks).
  std::vector<Matrix*> Parameters();
  std::vector<const Matrix*> Parameters() const;
  std::vector<std::string> ParameterNames() const;

  bool operator==(const DippmModel&) const = default;
};

/// Glorot-uniform weights, zero biases, identity normalizer.
DippmModel InitModel(ModelArch arch, int hidden, uint64_t seed);

enum class Mode { kTrain, kEval };

Matrix FeatureMatrix(const GraphEncoding& encoding);

/// H_out[v] = ReLU(H_in[v]·W_self + mean_{u -> v} H_in[u]·W_neigh + bias);
/// nodes without predecessors get a zero neighbour term.
Matrix SageForward(const GraphEncoding& encoding, const SageLayerParams& layer,
                   const Matrix& h_in);

/// 1 x width mean over node rows.
Matrix ReadoutMean(const Matrix& z);

/// Network output in normalized target space. `rng` drives dropout and is
/// only required in kTrain mode.
std::array<double, kNumTargets> Forward(const GraphEncoding& encoding, const StaticFeatures& fs,
                                        const DippmModel& model, Mode mode, Rng* rng = nullptr);

/// Eval-mode prediction in original units.
TargetVector Predict(const DippmModel& model, const GraphEncoding& encoding,
                     const StaticFeatures& fs);
std::vector<TargetVector> PredictAll(const DippmModel& model,
                                     std::span<const DatasetRecord> records);

struct Gradients {
  double loss = 0.0;
  std::vector<Matrix> grads;  // aligned with DippmModel::Parameters()
};

/// Mean Huber loss over `batch` (normalized targets) and its exact gradient
/// with respect to every parameter. Dropout masks drawn in the forward pass
/// are reused in the backward pass.
Gradients Backward(std::span<const DatasetRecord> batch, const DippmModel& model, Mode mode,
                   Rng* rng = nullptr, double huber_delta = kDefaultHuberDelta);

struct TrainConfig {
  int epochs = 10;
  double lr = kDefaultLearningRate;
  uint64_t seed = 0;
  int hidden = kDefaultHidden;
  double huber_delta = kDefaultHuberDelta;
  bool shuffle = true;
  ModelArch arch = ModelArch::kSage;
  double dropout_p = kDefaultDropout;
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;  // mean training-mode Huber loss over the epoch
  double train_mape = 0.0;  // eval mode, overall
  double val_mape = 0.0;    // eval mode, overall; NaN without a validation split
  double val_loss = 0.0;
};

struct TrainResult {
  DippmModel model;
  std::vector<EpochStats> history;
};

using EpochCallback = std::function<void(const EpochStats&)>;

/// One Adam step per record, records shuffled every epoch. Deterministic for
/// a given config.
TrainResult Train(std::span<const DatasetRecord> train, std::span<const DatasetRecord> val,
                  const TrainConfig& config, const EpochCallback& on_epoch = {});

MapeResult Evaluate(const DippmModel& model, std::span<const DatasetRecord> records);

std::string ModelToJson(const DippmModel& model);
DippmModel ModelFromJson(std::string_view text);
void SaveModel(const DippmModel& model, const std::string& path);
DippmModel LoadModel(const std::string& path);

}  // namespace dippm

#endif  // DIPPM_GNN_H_
