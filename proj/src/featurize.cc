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

#include "dippm/featurize.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "dippm/error.h"

namespace dippm {
namespace {

const Shape& FirstInputShape(const ComputationGraph& graph, const IRNode& node) {
  if (node.inputs.empty()) {
    Fail(ErrorCode::kUnderspecified,
         "node " + std::to_string(node.id) + " (" + node.raw_name + ") has no input");
  }
  return graph.node(node.inputs.front()).out_shape;
}

int64_t KernelArea(const IRNode& node) {
  const auto kh = static_cast<int64_t>(node.attr(Attr::kKernelH));
  const auto kw = static_cast<int64_t>(node.attr(Attr::kKernelW));
  if (kh < 1 || kw < 1) {
    Fail(ErrorCode::kUnderspecified, "node " + std::to_string(node.id) + " lacks kernel size");
  }
  return kh * kw;
}

int64_t Groups(const IRNode& node) {
  const auto g = static_cast<int64_t>(node.attr(Attr::kGroups));
  return g > 0 ? g : 1;
}

void RequireRank(const IRNode& node, const Shape& shape, size_t rank) {
  if (shape.size() != rank) {
    Fail(ErrorCode::kUnderspecified, "node " + std::to_string(node.id) + " expects rank " +
                                         std::to_string(rank) + ", got " + ShapeToString(shape));
  }
}

int64_t NodeMacs(const ComputationGraph& graph, const IRNode& node) {
  switch (node.kind) {
    case OperatorKind::kConv2d: {
      const Shape& in = FirstInputShape(graph, node);
      RequireRank(node, in, 4);
      RequireRank(node, node.out_shape, 4);
      return ElementCount(node.out_shape) * (in[1] / Groups(node)) * KernelArea(node);
    }
    case OperatorKind::kConv2dTranspose: {
      const Shape& in = FirstInputShape(graph, node);
      RequireRank(node, in, 4);
      RequireRank(node, node.out_shape, 4);
      return ElementCount(in) * (node.out_shape[1] / Groups(node)) * KernelArea(node);
    }
    case OperatorKind::kDense: {
      const Shape& in = FirstInputShape(graph, node);
      // Leading dimensions act as the row count; the last one is in_features.
      return ElementCount(in) * node.out_shape.back();
    }
    case OperatorKind::kBatchMatmul: {
      const Shape& a = FirstInputShape(graph, node);
      RequireRank(node, a, 3);
      RequireRank(node, node.out_shape, 3);
      return ElementCount(node.out_shape) * a[2];
    }
    default:
      return 0;
  }
}

double Log1pSlot(double v) { return std::log1p(std::max(0.0, v)); }

}  // namespace

std::array<double, kStaticFeatureWidth> StaticFeatures::AsVector() const {
  return {std::log1p(static_cast<double>(macs)), std::log1p(static_cast<double>(batch)),
          std::log1p(static_cast<double>(t_conv)), std::log1p(static_cast<double>(t_dense)),
          std::log1p(static_cast<double>(t_relu))};
}

std::vector<int> FilterAndPreprocess(const ComputationGraph& graph) {
  const size_t n = graph.nodes.size();
  std::vector<char> visited(n, 0);
  std::vector<int> order;
  // Explicit stack of (node, next input index) to keep deep graphs off the
  // call stack.
  std::vector<std::pair<int, size_t>> stack;
  for (int root : graph.outputs) {
    if (visited[static_cast<size_t>(root)]) continue;
    visited[static_cast<size_t>(root)] = 1;
    stack.emplace_back(root, 0);
    while (!stack.empty()) {
      auto& [id, next] = stack.back();
      const IRNode& node = graph.node(id);
      if (next < node.inputs.size()) {
        const int child = node.inputs[next++];
        if (!visited[static_cast<size_t>(child)]) {
          visited[static_cast<size_t>(child)] = 1;
          stack.emplace_back(child, 0);
        }
        continue;
      }
      if (node.is_operator()) order.push_back(id);
      stack.pop_back();
    }
  }
  if (order.empty()) Fail(ErrorCode::kEmptyGraph, "graph '" + graph.name + "' has no operator nodes");
  return order;
}

NodeFeatureVector EncodeNode(const IRNode& node) {
  NodeFeatureVector row{};
  row[static_cast<size_t>(node.kind)] = 1.0;
  for (int a = 0; a < kNumAttrs; ++a) {
    const double v = node.attrs[static_cast<size_t>(a)];
    const auto attr = static_cast<Attr>(a);
    double slot;
    if (attr == Attr::kEpsilon) {
      slot = v;
    } else if (attr == Attr::kHasBias) {
      slot = v != 0.0 ? 1.0 : 0.0;
    } else {
      slot = Log1pSlot(v);
    }
    row[static_cast<size_t>(kAttrSlotBegin + a)] = slot;
  }
  for (size_t d = 0; d < node.out_shape.size() && d < 4; ++d) {
    row[kShapeSlotBegin + d] = Log1pSlot(static_cast<double>(node.out_shape[d]));
  }
  return row;
}

GraphEncoding CreateGraphEncoding(const ComputationGraph& graph) {
  const std::vector<int> order = FilterAndPreprocess(graph);
  std::vector<int> row_of(graph.nodes.size(), -1);
  for (size_t r = 0; r < order.size(); ++r) row_of[static_cast<size_t>(order[r])] = static_cast<int>(r);

  GraphEncoding enc;
  enc.num_nodes = static_cast<int>(order.size());
  enc.features.reserve(order.size());
  std::set<std::pair<int, int>> edges;
  std::vector<int> pending;
  std::vector<char> seen(graph.nodes.size(), 0);
  for (int id : order) {
    const IRNode& node = graph.node(id);
    enc.features.push_back(EncodeNode(node));
    // Walk back through data nodes to the nearest operator producers.
    std::fill(seen.begin(), seen.end(), 0);
    pending.assign(node.inputs.begin(), node.inputs.end());
    while (!pending.empty()) {
      const int producer = pending.back();
      pending.pop_back();
      if (seen[static_cast<size_t>(producer)]) continue;
      seen[static_cast<size_t>(producer)] = 1;
      const IRNode& p = graph.node(producer);
      if (p.is_operator()) {
        edges.emplace(row_of[static_cast<size_t>(producer)], row_of[static_cast<size_t>(id)]);
      } else {
        pending.insert(pending.end(), p.inputs.begin(), p.inputs.end());
      }
    }
  }
  enc.edges.assign(edges.begin(), edges.end());
  return enc;
}

int64_t ComputeMacs(const ComputationGraph& graph) {
  int64_t total = 0;
  for (const auto& node : graph.nodes) total += NodeMacs(graph, node);
  return total;
}

StaticFeatures ComputeStaticFeatures(const ComputationGraph& graph) {
  StaticFeatures fs;
  fs.macs = ComputeMacs(graph);
  fs.batch = graph.batch_size;
  for (const auto& node : graph.nodes) {
    switch (node.kind) {
      case OperatorKind::kConv2d: ++fs.t_conv; break;
      case OperatorKind::kDense: ++fs.t_dense; break;
      case OperatorKind::kRelu: ++fs.t_relu; break;
      default: break;
    }
  }
  return fs;
}

nlohmann::ordered_json EncodingToJson(const GraphEncoding& encoding) {
  nlohmann::ordered_json doc;
  doc["n"] = encoding.num_nodes;
  auto edges = nlohmann::ordered_json::array();
  for (const auto& [src, dst] : encoding.edges) edges.push_back({src, dst});
  doc["edges"] = std::move(edges);
  auto x = nlohmann::ordered_json::array();
  for (const auto& row : encoding.features) x.push_back(row);
  doc["x"] = std::move(x);
  return doc;
}

GraphEncoding EncodingFromJson(const nlohmann::ordered_json& doc) {
  GraphEncoding enc;
  enc.num_nodes = doc.at("n").get<int>();
  for (const auto& e : doc.at("edges")) {
    if (!e.is_array() || e.size() != 2) {
      Fail(ErrorCode::kMalformedRecord, "edge must be a [src, dst] pair");
    }
    enc.edges.emplace_back(e[0].get<int>(), e[1].get<int>());
  }
  for (const auto& row : doc.at("x")) {
    if (!row.is_array() || row.size() != kNodeFeatureWidth) {
      Fail(ErrorCode::kMalformedRecord, "feature row must have 32 entries");
    }
    NodeFeatureVector v{};
    for (size_t i = 0; i < v.size(); ++i) v[i] = row[i].get<double>();
    enc.features.push_back(v);
  }
  ValidateEncoding(enc);
  return enc;
}

void ValidateEncoding(const GraphEncoding& encoding) {
  if (encoding.num_nodes < 1) Fail(ErrorCode::kEmptyGraph, "encoding has no nodes");
  if (encoding.features.size() != static_cast<size_t>(encoding.num_nodes)) {
    Fail(ErrorCode::kMalformedRecord, "feature row count differs from node count");
  }
  std::set<std::pair<int, int>> unique;
  for (const auto& [src, dst] : encoding.edges) {
    if (src < 0 || dst < 0 || src >= encoding.num_nodes || dst >= encoding.num_nodes) {
      Fail(ErrorCode::kMalformedRecord, "edge endpoint out of range");
    }
    if (src == dst) Fail(ErrorCode::kMalformedRecord, "self-loop edge");
    if (!unique.emplace(src, dst).second) Fail(ErrorCode::kMalformedRecord, "duplicate edge");
  }
}

}  // namespace dippm
