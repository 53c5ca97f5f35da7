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

#ifndef DIPPM_DATASET_H_
#define DIPPM_DATASET_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dippm/featurize.h"
#include "dippm/graph_ir.h"
#include "dippm/zoo.h"

namespace dippm {

inline constexpr int kNumTargets = 3;

/// Regression targets, ordered (latency, memory, energy) everywhere.
struct TargetVector {
  double latency_ms = 0.0;
  double memory_mb = 0.0;
  double energy_j = 0.0;

  std::array<double, kNumTargets> AsArray() const { return {latency_ms, memory_mb, energy_j}; }
  static TargetVector FromArray(const std::array<double, kNumTargets>& v) {
    return {v[0], v[1], v[2]};
  }
  bool IsValid() const;

  bool operator==(const TargetVector&) const = default;
};

struct DatasetRecord {
  std::string model_name;
  GraphEncoding encoding;
  StaticFeatures fs;
  TargetVector target;

  bool operator==(const DatasetRecord&) const = default;
};

/// Longest path, counted in edges, through the operator graph.
int OperatorDepth(const ComputationGraph& graph);

/// Closed-form synthetic cost model standing in for hardware measurement:
///
///   latency_ms = 0.05 * N_op + MACs / 1e8 + 0.2 * depth
///   memory_mb  = 600 + 4 * (weights + peak_activation) / 2^20
///   energy_j   = 0.25 * latency_ms * (1 + MACs / 1e9)
///
/// N_op counts operator nodes reachable from the outputs, depth is
/// OperatorDepth, weights sums conv2d/conv2d_transpose/dense weight elements
/// (biases excluded) and peak_activation is the largest operator output.
TargetVector OracleLabels(const ComputationGraph& graph);

DatasetRecord MakeRecord(const ComputationGraph& graph);

struct FamilyWeight {
  ZooFamily family;
  double weight;
};

/// Parses "mlp,vggish" (equal weights) or "mlp:2,resnetish:1".
std::vector<FamilyWeight> ParseFamilyMix(const std::string& text);
std::vector<FamilyWeight> DefaultFamilyMix();

/// Samples one ZooSpec per record: family by weight, depth 1-6, width from
/// {8,16,32,64}, batch from {1,...,64}, input_hw from {8,16,32,64}.
std::vector<ZooSpec> SampleZooSpecs(int n, std::span<const FamilyWeight> mix, uint64_t seed);
std::vector<DatasetRecord> SynthDataset(int n, std::span<const FamilyWeight> mix, uint64_t seed);

struct SplitSpec {
  double train_frac = 0.70;
  double val_frac = 0.15;
  double test_frac = 0.15;
  uint64_t seed = 0;
};

struct SplitSizes {
  size_t train = 0;
  size_t val = 0;
  size_t test = 0;
};

/// train = round(n*train_frac), val = round(n*val_frac), test takes the
/// rest; for n >= 3, val and test are then topped up to at least one record
/// each by taking from train.
SplitSizes ComputeSplitSizes(size_t n, const SplitSpec& spec);

struct DatasetSplit {
  std::vector<DatasetRecord> train;
  std::vector<DatasetRecord> val;
  std::vector<DatasetRecord> test;
};

DatasetSplit Split(std::vector<DatasetRecord> records, const SplitSpec& spec);

struct MapeResult {
  double latency = 0.0;
  double memory = 0.0;
  double energy = 0.0;
  double overall = 0.0;
};

MapeResult Mape(std::span<const TargetVector> preds, std::span<const TargetVector> actuals);

/// One JSON object per line; see RecordToJsonLine for the schema.
std::string RecordToJsonLine(const DatasetRecord& record);
DatasetRecord RecordFromJsonLine(const std::string& line, size_t line_number);

void WriteDataset(std::span<const DatasetRecord> records, const std::string& path);
std::vector<DatasetRecord> ReadDataset(const std::string& path);

}  // namespace dippm

#endif  // DIPPM_DATASET_H_
