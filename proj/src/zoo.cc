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

#include "dippm/zoo.h"

#include <algorithm>

#include "dippm/error.h"
#include "dippm/numerics.h"

namespace dippm {
namespace {

constexpr int kClassifierClasses = 10;
constexpr int kMaxDepth = 64;
constexpr int kMaxWidth = 4096;

// Appends nodes and infers each new shape immediately so builders can read
// shapes back while wiring the next layer.
class GraphBuilder {
 public:
  explicit GraphBuilder(ComputationGraph& graph) : graph_(graph) {}

  int Input(Shape shape) {
    IRNode node;
    node.raw_name = "input";
    node.out_shape = std::move(shape);
    return Push(std::move(node));
  }

  int Op(OperatorKind kind, std::vector<int> inputs,
         std::initializer_list<std::pair<Attr, double>> attrs = {}) {
    IRNode node;
    node.kind = kind;
    node.raw_name = std::string(OperatorKindName(kind));
    node.inputs = std::move(inputs);
    for (const auto& [attr, value] : attrs) node.set_attr(attr, value);
    return Push(std::move(node));
  }

  const Shape& shape(int id) const { return graph_.nodes[static_cast<size_t>(id)].out_shape; }

  void Finish(int output) {
    graph_.outputs = {output};
    ValidateGraph(graph_);
  }

 private:
  int Push(IRNode node) {
    node.id = static_cast<int>(graph_.nodes.size());
    graph_.nodes.push_back(std::move(node));
    graph_.outputs = {graph_.nodes.back().id};
    graph_ = InferShapes(std::move(graph_));
    return graph_.nodes.back().id;
  }

  ComputationGraph& graph_;
};

void BuildMlp(const ZooSpec& spec, ComputationGraph& graph, Rng& rng) {
  GraphBuilder b(graph);
  int x = b.Input({spec.batch_size, static_cast<int64_t>(spec.input_hw) * spec.input_hw});
  for (int i = 0; i < spec.depth; ++i) {
    const int width = rng.UniformInt(2) == 0 ? spec.width : 2 * spec.width;
    x = b.Op(OperatorKind::kDense, {x}, {{Attr::kOutFeatures, width}, {Attr::kHasBias, 1}});
    x = b.Op(OperatorKind::kRelu, {x});
  }
  b.Finish(x);
}

void BuildConvNet(const ZooSpec& spec, bool residual, ComputationGraph& graph, Rng& rng) {
  GraphBuilder b(graph);
  int x = b.Input({spec.batch_size, 3, spec.input_hw, spec.input_hw});
  for (int i = 0; i < spec.depth; ++i) {
    const int block_input = x;
    const double kernel = 1.0 + 2.0 * static_cast<double>(rng.UniformInt(3));
    const double pad = (kernel - 1.0) / 2.0;
    x = b.Op(OperatorKind::kConv2d, {x},
             {{Attr::kKernelH, kernel},
              {Attr::kKernelW, kernel},
              {Attr::kStrideH, 1},
              {Attr::kStrideW, 1},
              {Attr::kPadH, pad},
              {Attr::kPadW, pad},
              {Attr::kDilationH, 1},
              {Attr::kDilationW, 1},
              {Attr::kGroups, 1},
              {Attr::kOutFeatures, spec.width},
              {Attr::kHasBias, 1}});
    x = b.Op(OperatorKind::kRelu, {x});
    if (residual && b.shape(block_input) == b.shape(x)) {
      x = b.Op(OperatorKind::kAdd, {block_input, x});
    }
    // Halve the spatial extent until it reaches 1.
    const auto pool = static_cast<double>(std::min<int64_t>(2, b.shape(x)[2]));
    x = b.Op(OperatorKind::kMaxPool2d, {x},
             {{Attr::kKernelH, pool},
              {Attr::kKernelW, pool},
              {Attr::kStrideH, pool},
              {Attr::kStrideW, pool}});
  }
  x = b.Op(OperatorKind::kReshape, {x});
  x = b.Op(OperatorKind::kDense, {x}, {{Attr::kOutFeatures, 4.0 * spec.width}, {Attr::kHasBias, 1}});
  x = b.Op(OperatorKind::kRelu, {x});
  x = b.Op(OperatorKind::kDense, {x}, {{Attr::kOutFeatures, kClassifierClasses}, {Attr::kHasBias, 1}});
  b.Finish(x);
}

}  // namespace

std::string_view ZooFamilyName(ZooFamily family) {
  switch (family) {
    case ZooFamily::kMlp: return "mlp";
    case ZooFamily::kVggish: return "vggish";
    case ZooFamily::kResnetish: return "resnetish";
  }
  return "unknown";
}

std::optional<ZooFamily> ZooFamilyFromName(std::string_view name) {
  for (ZooFamily f : {ZooFamily::kMlp, ZooFamily::kVggish, ZooFamily::kResnetish}) {
    if (ZooFamilyName(f) == name) return f;
  }
  return std::nullopt;
}

void ValidateZooSpec(const ZooSpec& spec) {
  if (spec.depth < 1 || spec.depth > kMaxDepth) {
    Fail(ErrorCode::kInvalidSpec, "depth must be in [1," + std::to_string(kMaxDepth) + "]");
  }
  if (spec.width < 1 || spec.width > kMaxWidth) {
    Fail(ErrorCode::kInvalidSpec, "width must be in [1," + std::to_string(kMaxWidth) + "]");
  }
  if (spec.batch_size < 1) Fail(ErrorCode::kInvalidSpec, "batch must be positive");
  const int hw = spec.input_hw;
  if (hw < 8 || hw > 256 || (hw & (hw - 1)) != 0) {
    Fail(ErrorCode::kInvalidSpec, "input_hw must be a power of two in [8,256]");
  }
}

ComputationGraph BuildZooModel(const ZooSpec& spec) {
  ValidateZooSpec(spec);
  ComputationGraph graph;
  graph.name = std::string(ZooFamilyName(spec.family)) + "_d" + std::to_string(spec.depth) +
               "_w" + std::to_string(spec.width) + "_b" + std::to_string(spec.batch_size) +
               "_hw" + std::to_string(spec.input_hw) + "_s" + std::to_string(spec.seed);
  graph.batch_size = spec.batch_size;
  Rng rng(spec.seed, /*stream=*/0x200);
  switch (spec.family) {
    case ZooFamily::kMlp:
      BuildMlp(spec, graph, rng);
      break;
    case ZooFamily::kVggish:
      BuildConvNet(spec, /*residual=*/false, graph, rng);
      break;
    case ZooFamily::kResnetish:
      BuildConvNet(spec, /*residual=*/true, graph, rng);
      break;
  }
  return graph;
}

}  // namespace dippm
