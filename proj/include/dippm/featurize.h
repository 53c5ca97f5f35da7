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

// Graph featurization: per-operator feature rows, the producer->consumer
// edge list and the graph-level static feature vector.

#ifndef DIPPM_FEATURIZE_H_
#define DIPPM_FEATURIZE_H_

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "dippm/graph_ir.h"
#include "json.hpp"

namespace dippm {

// Slot layout of a node feature row:
//   [0, 16)   one-hot OperatorKind
//   [16, 28)  attributes in Attr order; log1p-scaled except has_bias (0/1)
//             and epsilon (raw)
//   [28, 32)  output shape N, C, H, W, log1p-scaled, missing ranks are 0
inline constexpr int kNodeFeatureWidth = 32;
inline constexpr int kAttrSlotBegin = kNumOperatorKinds;
inline constexpr int kShapeSlotBegin = kAttrSlotBegin + kNumAttrs;
inline constexpr int kStaticFeatureWidth = 5;

using NodeFeatureVector = std::array<double, kNodeFeatureWidth>;

struct GraphEncoding {
  int num_nodes = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<NodeFeatureVector> features;

  bool operator==(const GraphEncoding&) const = default;
};

struct StaticFeatures {
  int64_t macs = 0;
  int64_t batch = 1;
  int64_t t_conv = 0;
  int64_t t_dense = 0;
  int64_t t_relu = 0;

  /// log1p of (macs, batch, t_conv, t_dense, t_relu).
  std::array<double, kStaticFeatureWidth> AsVector() const;

  bool operator==(const StaticFeatures&) const = default;
};

/// Operator node ids in DFS post-order from the declared outputs (first
/// output first), visiting inputs in order. Data nodes are skipped.
std::vector<int> FilterAndPreprocess(const ComputationGraph& graph);

NodeFeatureVector EncodeNode(const IRNode& node);

/// One feature row per operator in FilterAndPreprocess order and one edge per
/// operator-to-operator data dependency, contracted through data nodes.
/// Edges are sorted by (src, dst).
GraphEncoding CreateGraphEncoding(const ComputationGraph& graph);

/// Multiply-accumulates of conv2d, conv2d_transpose, dense and batch_matmul;
/// every other operator contributes 0.
int64_t ComputeMacs(const ComputationGraph& graph);

StaticFeatures ComputeStaticFeatures(const ComputationGraph& graph);

/// {"n": int, "edges": [[int,int]], "x": [[float x 32]]}
nlohmann::ordered_json EncodingToJson(const GraphEncoding& encoding);
GraphEncoding EncodingFromJson(const nlohmann::ordered_json& doc);
void ValidateEncoding(const GraphEncoding& encoding);

}  // namespace dippm

#endif  // DIPPM_FEATURIZE_H_
