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

// Framework-neutral computation-graph IR.
//
// A graph is a list of nodes in topological order with dense ids 0..N-1.
// Every node has an operator name, a fixed set of numeric attributes and an
// NCHW output shape (rank 1-4, shorter ranks left-aligned). Nodes named
// "input", "var", "placeholder", "param", "const" or "constant" are data
// nodes, everything else is an operator.

#ifndef DIPPM_GRAPH_IR_H_
#define DIPPM_GRAPH_IR_H_

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dippm {

/// Operator vocabulary. The numeric value is the one-hot slot index and is
/// part of the serialized model contract (see kVocabVersion).
enum class OperatorKind : int {
  kConv2d = 0,
  kConv2dTranspose = 1,
  kDense = 2,
  kBatchMatmul = 3,
  kRelu = 4,
  kAdd = 5,
  kMultiply = 6,
  kMaxPool2d = 7,
  kAvgPool2d = 8,
  kGlobalAvgPool2d = 9,
  kBatchNorm = 10,
  kSoftmax = 11,
  kReshape = 12,
  kConcat = 13,
  kLayerNorm = 14,
  kOther = 15,
};

inline constexpr int kNumOperatorKinds = 16;
inline constexpr std::string_view kVocabVersion = "v1";

/// Maps an operator name to its kind. Unknown names map to kOther.
OperatorKind OperatorKindFromName(std::string_view name);
std::string_view OperatorKindName(OperatorKind kind);

/// False for data nodes (graph inputs, parameters, constants).
bool IsOperatorName(std::string_view raw_name);

enum class Attr : int {
  kKernelH = 0,
  kKernelW,
  kStrideH,
  kStrideW,
  kPadH,
  kPadW,
  kDilationH,
  kDilationW,
  kGroups,
  kOutFeatures,
  kHasBias,
  kEpsilon,
};

inline constexpr int kNumAttrs = 12;

std::string_view AttrName(Attr attr);

using Shape = std::vector<int64_t>;

int64_t ElementCount(const Shape& shape);
std::string ShapeToString(const Shape& shape);

struct IRNode {
  int id = 0;
  OperatorKind kind = OperatorKind::kOther;
  std::string raw_name;
  // Absent attributes are 0.
  std::array<double, kNumAttrs> attrs{};
  Shape out_shape;
  std::vector<int> inputs;

  double attr(Attr a) const { return attrs[static_cast<int>(a)]; }
  void set_attr(Attr a, double value) { attrs[static_cast<int>(a)] = value; }
  bool is_operator() const { return IsOperatorName(raw_name); }

  bool operator==(const IRNode&) const = default;
};

struct ComputationGraph {
  std::string name;
  int64_t batch_size = 1;
  std::vector<IRNode> nodes;
  std::vector<int> outputs;

  const IRNode& node(int id) const { return nodes.at(static_cast<size_t>(id)); }

  bool operator==(const ComputationGraph&) const = default;
};

/// Parses the JSON graph document, re-sorts nodes topologically (relabelling
/// ids densely), validates references and infers missing shapes.
ComputationGraph ParseGraphJson(std::string_view text);

/// Canonical JSON rendering; ParseGraphJson(SerializeGraphJson(g)) == g for
/// every graph produced by this library.
std::string SerializeGraphJson(const ComputationGraph& graph);

/// Checks the structural invariants: dense ids in topological order, inputs
/// referencing earlier nodes, valid outputs and shapes.
void ValidateGraph(const ComputationGraph& graph);

/// Fills out_shape for every node with inputs. Explicit shapes on reshape and
/// `other` nodes are trusted; for every other operator an explicit shape must
/// agree with the inferred one. Idempotent.
ComputationGraph InferShapes(ComputationGraph graph);

/// Rewrites the leading (batch) dimension of every data node and re-infers
/// all downstream shapes.
ComputationGraph WithBatchSize(const ComputationGraph& graph, int64_t batch);

}  // namespace dippm

#endif  // DIPPM_GRAPH_IR_H_
