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

#include "dippm/graph_ir.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <sstream>
#include <unordered_map>

#include "dippm/error.h"
#include "json.hpp"

namespace dippm {
namespace {

using Json = nlohmann::ordered_json;

constexpr std::array<std::string_view, kNumOperatorKinds> kKindNames = {
    "conv2d",    "conv2d_transpose", "dense",     "batch_matmul",
    "relu",      "add",              "multiply",  "maxpool2d",
    "avgpool2d", "global_avgpool2d", "batchnorm", "softmax",
    "reshape",   "concat",           "layernorm", "other",
};

constexpr std::array<std::string_view, kNumAttrs> kAttrNames = {
    "kernel_h",   "kernel_w",   "stride_h", "stride_w",
    "pad_h",      "pad_w",      "dilation_h", "dilation_w",
    "groups",     "out_features", "has_bias", "epsilon",
};

constexpr std::array<std::string_view, 6> kDataNodeNames = {
    "input", "var", "placeholder", "param", "const", "constant",
};

std::string NodeLabel(const IRNode& node) {
  return "node " + std::to_string(node.id) + " (" + node.raw_name + ")";
}

[[noreturn]] void Malformed(const std::string& what) {
  Fail(ErrorCode::kMalformedDocument, what);
}

int64_t ToInt(const Json& value, const std::string& what) {
  if (value.is_number_integer()) return value.get<int64_t>();
  if (value.is_number_float()) {
    double d = value.get<double>();
    if (std::isfinite(d) && d == std::floor(d) && std::fabs(d) < 9.0e15) {
      return static_cast<int64_t>(d);
    }
  }
  Malformed(what + " must be an integer");
}

Shape ParseShape(const Json& value, const std::string& where) {
  if (!value.is_array()) Malformed(where + ": out_shape must be an array");
  Shape shape;
  for (const auto& dim : value) shape.push_back(ToInt(dim, where + ": out_shape entry"));
  if (shape.empty() || shape.size() > 4) {
    Fail(ErrorCode::kBadShape, where + ": rank must be in [1,4], got " +
                                   std::to_string(shape.size()));
  }
  for (int64_t d : shape) {
    if (d < 1) Fail(ErrorCode::kBadShape, where + ": non-positive dimension in " + ShapeToString(shape));
  }
  return shape;
}

// Kahn's algorithm; among ready nodes the one appearing first in the document
// wins, so an already topological document keeps its order.
std::vector<size_t> TopologicalOrder(const std::vector<IRNode>& nodes,
                                     const std::unordered_map<int, size_t>& pos_of_id) {
  const size_t n = nodes.size();
  std::vector<int> pending(n, 0);
  std::vector<std::vector<size_t>> consumers(n);
  for (size_t i = 0; i < n; ++i) {
    for (int in : nodes[i].inputs) {
      size_t p = pos_of_id.at(in);
      consumers[p].push_back(i);
      ++pending[i];
    }
  }
  std::priority_queue<size_t, std::vector<size_t>, std::greater<>> ready;
  for (size_t i = 0; i < n; ++i) {
    if (pending[i] == 0) ready.push(i);
  }
  std::vector<size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    size_t i = ready.top();
    ready.pop();
    order.push_back(i);
    for (size_t c : consumers[i]) {
      if (--pending[c] == 0) ready.push(c);
    }
  }
  if (order.size() != n) {
    for (size_t i = 0; i < n; ++i) {
      if (pending[i] > 0) {
        Fail(ErrorCode::kCyclicGraph, "cycle through " + NodeLabel(nodes[i]));
      }
    }
  }
  return order;
}

Json AttrValueToJson(Attr attr, double v) {
  if (attr != Attr::kEpsilon && v == std::floor(v) && std::fabs(v) < 9.0e15) {
    return Json(static_cast<int64_t>(v));
  }
  return Json(v);
}

const Shape& InputShape(const ComputationGraph& g, const IRNode& node, size_t k) {
  if (node.inputs.size() <= k) {
    Fail(ErrorCode::kUnderspecified, NodeLabel(node) + " needs at least " +
                                         std::to_string(k + 1) + " input(s)");
  }
  return g.nodes[static_cast<size_t>(node.inputs[k])].out_shape;
}

int64_t PositiveAttrOr(const IRNode& node, Attr attr, int64_t fallback) {
  double v = node.attr(attr);
  return v > 0 ? static_cast<int64_t>(v) : fallback;
}

int64_t RequiredAttr(const IRNode& node, Attr attr) {
  double v = node.attr(attr);
  if (v < 1) {
    Fail(ErrorCode::kUnderspecified,
         NodeLabel(node) + " requires attribute " + std::string(AttrName(attr)));
  }
  return static_cast<int64_t>(v);
}

int64_t WindowOutput(const IRNode& node, int64_t in, int64_t kernel, int64_t stride,
                     int64_t pad, int64_t dilation) {
  int64_t out = (in + 2 * pad - dilation * (kernel - 1) - 1) / stride + 1;
  if (in + 2 * pad - dilation * (kernel - 1) - 1 < 0 || out < 1) {
    Fail(ErrorCode::kBadShape, NodeLabel(node) + " window does not fit input extent " +
                                   std::to_string(in));
  }
  return out;
}

void RequireRank(const IRNode& node, const Shape& shape, size_t rank) {
  if (shape.size() != rank) {
    Fail(ErrorCode::kShapeMismatch, NodeLabel(node) + " expects rank-" + std::to_string(rank) +
                                        " input, got " + ShapeToString(shape));
  }
}

Shape InferWindowed(const IRNode& node, const Shape& in, int64_t out_channels) {
  RequireRank(node, in, 4);
  int64_t kh = RequiredAttr(node, Attr::kKernelH);
  int64_t kw = RequiredAttr(node, Attr::kKernelW);
  int64_t sh = PositiveAttrOr(node, Attr::kStrideH, 1);
  int64_t sw = PositiveAttrOr(node, Attr::kStrideW, 1);
  auto ph = static_cast<int64_t>(node.attr(Attr::kPadH));
  auto pw = static_cast<int64_t>(node.attr(Attr::kPadW));
  int64_t dh = PositiveAttrOr(node, Attr::kDilationH, 1);
  int64_t dw = PositiveAttrOr(node, Attr::kDilationW, 1);
  return {in[0], out_channels, WindowOutput(node, in[2], kh, sh, ph, dh),
          WindowOutput(node, in[3], kw, sw, pw, dw)};
}

Shape InferNodeShape(const ComputationGraph& g, const IRNode& node) {
  switch (node.kind) {
    case OperatorKind::kConv2d: {
      const Shape& in = InputShape(g, node, 0);
      RequireRank(node, in, 4);
      int64_t groups = PositiveAttrOr(node, Attr::kGroups, 1);
      int64_t out_c = RequiredAttr(node, Attr::kOutFeatures);
      if (in[1] % groups != 0 || out_c % groups != 0) {
        Fail(ErrorCode::kShapeMismatch, NodeLabel(node) + " channels not divisible by groups");
      }
      return InferWindowed(node, in, out_c);
    }
    case OperatorKind::kConv2dTranspose: {
      const Shape& in = InputShape(g, node, 0);
      RequireRank(node, in, 4);
      int64_t groups = PositiveAttrOr(node, Attr::kGroups, 1);
      int64_t out_c = RequiredAttr(node, Attr::kOutFeatures);
      if (in[1] % groups != 0 || out_c % groups != 0) {
        Fail(ErrorCode::kShapeMismatch, NodeLabel(node) + " channels not divisible by groups");
      }
      int64_t kh = RequiredAttr(node, Attr::kKernelH);
      int64_t kw = RequiredAttr(node, Attr::kKernelW);
      int64_t sh = PositiveAttrOr(node, Attr::kStrideH, 1);
      int64_t sw = PositiveAttrOr(node, Attr::kStrideW, 1);
      auto ph = static_cast<int64_t>(node.attr(Attr::kPadH));
      auto pw = static_cast<int64_t>(node.attr(Attr::kPadW));
      int64_t dh = PositiveAttrOr(node, Attr::kDilationH, 1);
      int64_t dw = PositiveAttrOr(node, Attr::kDilationW, 1);
      int64_t oh = (in[2] - 1) * sh - 2 * ph + dh * (kh - 1) + 1;
      int64_t ow = (in[3] - 1) * sw - 2 * pw + dw * (kw - 1) + 1;
      if (oh < 1 || ow < 1) Fail(ErrorCode::kBadShape, NodeLabel(node) + " produces empty output");
      return {in[0], out_c, oh, ow};
    }
    case OperatorKind::kDense: {
      Shape out = InputShape(g, node, 0);
      out.back() = RequiredAttr(node, Attr::kOutFeatures);
      return out;
    }
    case OperatorKind::kBatchMatmul: {
      const Shape& a = InputShape(g, node, 0);
      const Shape& b = InputShape(g, node, 1);
      RequireRank(node, a, 3);
      RequireRank(node, b, 3);
      if (a[0] != b[0] || a[2] != b[1]) {
        Fail(ErrorCode::kShapeMismatch, NodeLabel(node) + " operands " + ShapeToString(a) +
                                            " and " + ShapeToString(b) + " do not conform");
      }
      return {a[0], a[1], b[2]};
    }
    case OperatorKind::kAdd:
    case OperatorKind::kMultiply: {
      const Shape& first = InputShape(g, node, 0);
      for (size_t k = 1; k < node.inputs.size(); ++k) {
        const Shape& other = InputShape(g, node, k);
        if (other != first) {
          Fail(ErrorCode::kShapeMismatch, NodeLabel(node) + " elementwise inputs " +
                                              ShapeToString(first) + " and " +
                                              ShapeToString(other) + " differ");
        }
      }
      return first;
    }
    case OperatorKind::kRelu:
    case OperatorKind::kBatchNorm:
    case OperatorKind::kSoftmax:
    case OperatorKind::kLayerNorm:
      return InputShape(g, node, 0);
    case OperatorKind::kMaxPool2d:
    case OperatorKind::kAvgPool2d: {
      const Shape& in = InputShape(g, node, 0);
      RequireRank(node, in, 4);
      return InferWindowed(node, in, in[1]);
    }
    case OperatorKind::kGlobalAvgPool2d: {
      const Shape& in = InputShape(g, node, 0);
      RequireRank(node, in, 4);
      return {in[0], in[1], 1, 1};
    }
    case OperatorKind::kReshape: {
      // Without an explicit target shape, reshape flattens to [N, rest].
      const Shape& in = InputShape(g, node, 0);
      if (!node.out_shape.empty()) {
        if (ElementCount(node.out_shape) != ElementCount(in)) {
          Fail(ErrorCode::kShapeMismatch, NodeLabel(node) + " changes element count");
        }
        return node.out_shape;
      }
      return {in[0], ElementCount(in) / in[0]};
    }
    case OperatorKind::kConcat: {
      Shape out = InputShape(g, node, 0);
      if (out.size() < 2) {
        Fail(ErrorCode::kShapeMismatch, NodeLabel(node) + " concat needs rank >= 2");
      }
      for (size_t k = 1; k < node.inputs.size(); ++k) {
        const Shape& other = InputShape(g, node, k);
        bool compatible = other.size() == out.size();
        for (size_t d = 0; compatible && d < out.size(); ++d) {
          if (d != 1 && other[d] != out[d]) compatible = false;
        }
        if (!compatible) {
          Fail(ErrorCode::kShapeMismatch, NodeLabel(node) + " cannot concat " +
                                              ShapeToString(out) + " with " + ShapeToString(other));
        }
        out[1] += other[1];
      }
      return out;
    }
    case OperatorKind::kOther:
      if (!node.out_shape.empty()) return node.out_shape;
      return InputShape(g, node, 0);
  }
  return node.out_shape;
}

}  // namespace

OperatorKind OperatorKindFromName(std::string_view name) {
  for (int i = 0; i < kNumOperatorKinds; ++i) {
    if (kKindNames[static_cast<size_t>(i)] == name) return static_cast<OperatorKind>(i);
  }
  return OperatorKind::kOther;
}

std::string_view OperatorKindName(OperatorKind kind) {
  return kKindNames[static_cast<size_t>(kind)];
}

bool IsOperatorName(std::string_view raw_name) {
  return std::find(kDataNodeNames.begin(), kDataNodeNames.end(), raw_name) ==
         kDataNodeNames.end();
}

std::string_view AttrName(Attr attr) { return kAttrNames[static_cast<size_t>(attr)]; }

int64_t ElementCount(const Shape& shape) {
  int64_t count = 1;
  for (int64_t d : shape) count *= d;
  return count;
}

std::string ShapeToString(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

ComputationGraph ParseGraphJson(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    Malformed(e.what());
  }
  if (!doc.is_object()) Malformed("top level must be an object");
  if (!doc.contains("nodes") || !doc["nodes"].is_array()) Malformed("missing \"nodes\" array");
  if (!doc.contains("outputs") || !doc["outputs"].is_array()) Malformed("missing \"outputs\" array");
  if (!doc.contains("batch")) Malformed("missing \"batch\"");

  ComputationGraph parsed;
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) Malformed("\"name\" must be a string");
    parsed.name = doc["name"].get<std::string>();
  }
  parsed.batch_size = ToInt(doc["batch"], "batch");
  if (parsed.batch_size < 1) Malformed("batch must be positive");

  std::unordered_map<int, size_t> pos_of_id;
  for (const auto& jn : doc["nodes"]) {
    if (!jn.is_object()) Malformed("node entries must be objects");
    if (!jn.contains("id") || !jn.contains("op")) Malformed("node requires \"id\" and \"op\"");
    IRNode node;
    int64_t id = ToInt(jn["id"], "node id");
    if (id < 0 || id > INT32_MAX) Malformed("node id out of range");
    node.id = static_cast<int>(id);
    if (!jn["op"].is_string()) Malformed("node \"op\" must be a string");
    node.raw_name = jn["op"].get<std::string>();
    node.kind = OperatorKindFromName(node.raw_name);
    if (jn.contains("inputs")) {
      if (!jn["inputs"].is_array()) Malformed(NodeLabel(node) + ": inputs must be an array");
      for (const auto& in : jn["inputs"]) {
        int64_t ref = ToInt(in, "input id");
        if (ref < 0 || ref > INT32_MAX) {
          Fail(ErrorCode::kDanglingReference, NodeLabel(node) + " references id " + std::to_string(ref));
        }
        node.inputs.push_back(static_cast<int>(ref));
      }
    }
    if (jn.contains("attrs")) {
      if (!jn["attrs"].is_object()) Malformed(NodeLabel(node) + ": attrs must be an object");
      for (const auto& [key, value] : jn["attrs"].items()) {
        auto it = std::find(kAttrNames.begin(), kAttrNames.end(), key);
        if (it == kAttrNames.end()) continue;  // unrecognised attributes carry no feature slot
        if (!value.is_number()) Malformed(NodeLabel(node) + ": attr " + key + " must be numeric");
        double v = value.get<double>();
        if (!std::isfinite(v) || v < 0) {
          Malformed(NodeLabel(node) + ": attr " + key + " must be finite and non-negative");
        }
        node.attrs[static_cast<size_t>(it - kAttrNames.begin())] = v;
      }
    }
    if (jn.contains("out_shape")) node.out_shape = ParseShape(jn["out_shape"], NodeLabel(node));
    if (!pos_of_id.emplace(node.id, parsed.nodes.size()).second) {
      Malformed("duplicate node id " + std::to_string(node.id));
    }
    parsed.nodes.push_back(std::move(node));
  }

  for (const auto& node : parsed.nodes) {
    for (int in : node.inputs) {
      if (!pos_of_id.count(in)) {
        Fail(ErrorCode::kDanglingReference,
             NodeLabel(node) + " references missing id " + std::to_string(in));
      }
    }
  }
  std::vector<int> raw_outputs;
  for (const auto& out : doc["outputs"]) {
    int64_t ref = ToInt(out, "output id");
    if (ref < 0 || ref > INT32_MAX || !pos_of_id.count(static_cast<int>(ref))) {
      Fail(ErrorCode::kDanglingReference, "output references missing id " + std::to_string(ref));
    }
    raw_outputs.push_back(static_cast<int>(ref));
  }
  if (raw_outputs.empty()) Malformed("at least one output is required");

  std::vector<size_t> order = TopologicalOrder(parsed.nodes, pos_of_id);
  std::unordered_map<int, int> new_id;
  for (size_t k = 0; k < order.size(); ++k) {
    new_id[parsed.nodes[order[k]].id] = static_cast<int>(k);
  }

  ComputationGraph graph;
  graph.name = parsed.name;
  graph.batch_size = parsed.batch_size;
  graph.nodes.reserve(order.size());
  for (size_t pos : order) {
    IRNode node = parsed.nodes[pos];
    node.id = new_id.at(node.id);
    for (int& in : node.inputs) in = new_id.at(in);
    graph.nodes.push_back(std::move(node));
  }
  for (int out : raw_outputs) graph.outputs.push_back(new_id.at(out));

  return InferShapes(std::move(graph));
}

std::string SerializeGraphJson(const ComputationGraph& graph) {
  Json doc;
  doc["name"] = graph.name;
  doc["batch"] = graph.batch_size;
  doc["outputs"] = graph.outputs;
  Json nodes = Json::array();
  for (const auto& node : graph.nodes) {
    Json jn;
    jn["id"] = node.id;
    jn["op"] = node.raw_name;
    jn["inputs"] = node.inputs;
    Json attrs = Json::object();
    for (int a = 0; a < kNumAttrs; ++a) {
      double v = node.attrs[static_cast<size_t>(a)];
      if (v != 0.0) {
        attrs[std::string(kAttrNames[static_cast<size_t>(a)])] =
            AttrValueToJson(static_cast<Attr>(a), v);
      }
    }
    jn["attrs"] = std::move(attrs);
    jn["out_shape"] = node.out_shape;
    nodes.push_back(std::move(jn));
  }
  doc["nodes"] = std::move(nodes);
  return doc.dump();
}

void ValidateGraph(const ComputationGraph& graph) {
  if (graph.batch_size < 1) Fail(ErrorCode::kMalformedDocument, "batch must be positive");
  if (graph.outputs.empty()) Fail(ErrorCode::kMalformedDocument, "graph has no outputs");
  const int n = static_cast<int>(graph.nodes.size());
  for (int i = 0; i < n; ++i) {
    const IRNode& node = graph.nodes[static_cast<size_t>(i)];
    if (node.id != i) {
      Fail(ErrorCode::kMalformedDocument, "node ids must be dense and ordered; found " +
                                              std::to_string(node.id) + " at position " +
                                              std::to_string(i));
    }
    for (int in : node.inputs) {
      if (in < 0 || in >= n) {
        Fail(ErrorCode::kDanglingReference, NodeLabel(node) + " references missing id " +
                                                std::to_string(in));
      }
      if (in >= i) Fail(ErrorCode::kCyclicGraph, NodeLabel(node) + " consumes a later node");
    }
    if (node.out_shape.empty() || node.out_shape.size() > 4) {
      Fail(ErrorCode::kBadShape, NodeLabel(node) + " has rank " +
                                     std::to_string(node.out_shape.size()));
    }
    for (int64_t d : node.out_shape) {
      if (d < 1) Fail(ErrorCode::kBadShape, NodeLabel(node) + " has non-positive dimension");
    }
  }
  for (int out : graph.outputs) {
    if (out < 0 || out >= n) {
      Fail(ErrorCode::kDanglingReference, "output references missing id " + std::to_string(out));
    }
  }
}

ComputationGraph InferShapes(ComputationGraph graph) {
  for (auto& node : graph.nodes) {
    if (node.inputs.empty()) {
      if (node.out_shape.empty()) {
        Fail(ErrorCode::kUnderspecified, NodeLabel(node) + " is a source without out_shape");
      }
      continue;
    }
    Shape inferred = InferNodeShape(graph, node);
    if (inferred.empty() || inferred.size() > 4) {
      Fail(ErrorCode::kBadShape, NodeLabel(node) + " infers rank " + std::to_string(inferred.size()));
    }
    for (int64_t d : inferred) {
      if (d < 1) Fail(ErrorCode::kBadShape, NodeLabel(node) + " infers " + ShapeToString(inferred));
    }
    if (!node.out_shape.empty() && node.out_shape != inferred) {
      Fail(ErrorCode::kShapeMismatch, NodeLabel(node) + " declares " +
                                          ShapeToString(node.out_shape) + " but inputs give " +
                                          ShapeToString(inferred));
    }
    node.out_shape = std::move(inferred);
  }
  ValidateGraph(graph);
  return graph;
}

ComputationGraph WithBatchSize(const ComputationGraph& graph, int64_t batch) {
  if (batch < 1) Fail(ErrorCode::kInvalidArgument, "batch must be positive");
  ComputationGraph out = graph;
  out.batch_size = batch;
  for (auto& node : out.nodes) {
    bool keep_shape = node.inputs.empty() || node.kind == OperatorKind::kReshape ||
                      node.kind == OperatorKind::kOther;
    if (keep_shape) {
      if (!node.out_shape.empty()) node.out_shape[0] = batch;
    } else {
      node.out_shape.clear();
    }
  }
  return InferShapes(std::move(out));
}

}  // namespace dippm
