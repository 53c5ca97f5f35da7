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

#include <gtest/gtest.h>

#include <map>

#include "dippm/zoo.h"
#include "test_support.h"

namespace dippm {
namespace {

using ::dippm::testing::Build;
using ::dippm::testing::ErrorOf;
using ::dippm::testing::MakeNode;
using ::dippm::testing::RandomGraph;
using ::dippm::testing::ShuffledDocument;

TEST(ParseGraphJson, SingleNode) {
  const auto g = ParseGraphJson(
      R"({"nodes":[{"id":0,"op":"relu","out_shape":[1,8]}],"outputs":[0],"batch":1})");
  ASSERT_EQ(g.nodes.size(), 1u);
  EXPECT_EQ(g.nodes[0].kind, OperatorKind::kRelu);
  EXPECT_TRUE(g.nodes[0].inputs.empty());
  EXPECT_EQ(g.nodes[0].out_shape, (Shape{1, 8}));
  EXPECT_EQ(g.outputs, std::vector<int>{0});
}

TEST(ParseGraphJson, DanglingReference) {
  const char* doc = R"({"name":"d","batch":1,"outputs":[1],"nodes":[
      {"id":0,"op":"input","out_shape":[1,4]},
      {"id":1,"op":"relu","inputs":[7]}]})";
  EXPECT_EQ(ErrorOf([&] { ParseGraphJson(doc); }), ErrorCode::kDanglingReference);
}

TEST(ParseGraphJson, DanglingOutput) {
  const char* doc = R"({"batch":1,"outputs":[3],"nodes":[{"id":0,"op":"relu","out_shape":[1,4]}]})";
  EXPECT_EQ(ErrorOf([&] { ParseGraphJson(doc); }), ErrorCode::kDanglingReference);
}

TEST(ParseGraphJson, Cycle) {
  const char* doc = R"({"batch":1,"outputs":[0],"nodes":[
      {"id":0,"op":"relu","inputs":[1],"out_shape":[1,4]},
      {"id":1,"op":"relu","inputs":[0],"out_shape":[1,4]}]})";
  EXPECT_EQ(ErrorOf([&] { ParseGraphJson(doc); }), ErrorCode::kCyclicGraph);
}

TEST(ParseGraphJson, SelfLoopIsCycle) {
  const char* doc = R"({"batch":1,"outputs":[0],"nodes":[
      {"id":0,"op":"relu","inputs":[0],"out_shape":[1,4]}]})";
  EXPECT_EQ(ErrorOf([&] { ParseGraphJson(doc); }), ErrorCode::kCyclicGraph);
}

TEST(ParseGraphJson, MalformedDocuments) {
  for (const char* doc : {
           "{",
           "[]",
           R"({"batch":1,"outputs":[0]})",
           R"({"batch":1,"outputs":[0],"nodes":[{"op":"relu","out_shape":[1]}]})",
           R"({"batch":1,"outputs":[0],"nodes":[{"id":0,"out_shape":[1]}]})",
           R"({"batch":1,"outputs":[0],"nodes":[{"id":0,"op":"relu","out_shape":[1]},
                                                 {"id":0,"op":"relu","out_shape":[1]}]})",
           R"({"batch":1,"outputs":[0],"nodes":[{"id":0,"op":"relu","out_shape":"x"}]})",
           R"({"batch":1,"outputs":[0],"nodes":[{"id":0,"op":"relu","out_shape":[1],
                                                 "attrs":{"kernel_h":-1}}]})",
       }) {
    EXPECT_EQ(ErrorOf([&] { ParseGraphJson(doc); }), ErrorCode::kMalformedDocument) << doc;
  }
}

TEST(ParseGraphJson, BadShapes) {
  for (const char* doc : {
           R"({"batch":1,"outputs":[0],"nodes":[{"id":0,"op":"relu","out_shape":[1,0]}]})",
           R"({"batch":1,"outputs":[0],"nodes":[{"id":0,"op":"relu","out_shape":[1,-3]}]})",
           R"({"batch":1,"outputs":[0],"nodes":[{"id":0,"op":"relu","out_shape":[1,2,3,4,5]}]})",
       }) {
    EXPECT_EQ(ErrorOf([&] { ParseGraphJson(doc); }), ErrorCode::kBadShape) << doc;
  }
}

TEST(ParseGraphJson, ReordersNonTopologicalInput) {
  const auto g = ParseGraphJson(R"({"name":"r","batch":2,"outputs":[10],"nodes":[
      {"id":10,"op":"dense","inputs":[5],"attrs":{"out_features":3}},
      {"id":5,"op":"relu","inputs":[1]},
      {"id":1,"op":"input","out_shape":[2,6]}]})");
  ASSERT_EQ(g.nodes.size(), 3u);
  EXPECT_EQ(g.nodes[0].raw_name, "input");
  EXPECT_EQ(g.nodes[1].raw_name, "relu");
  EXPECT_EQ(g.nodes[2].raw_name, "dense");
  EXPECT_EQ(g.nodes[2].inputs, std::vector<int>{1});
  EXPECT_EQ(g.nodes[2].out_shape, (Shape{2, 3}));
  EXPECT_EQ(g.outputs, std::vector<int>{2});
}

TEST(ParseGraphJson, UnknownOperatorMapsToOther) {
  const auto g = ParseGraphJson(
      R"({"batch":1,"outputs":[0],"nodes":[{"id":0,"op":"gelu","out_shape":[1,8]}]})");
  EXPECT_EQ(g.nodes[0].kind, OperatorKind::kOther);
  EXPECT_EQ(g.nodes[0].raw_name, "gelu");
  EXPECT_TRUE(g.nodes[0].is_operator());
}

TEST(InferShapes, ConvFloorFormula) {
  IRNode conv = MakeNode("conv2d", {0});
  conv.set_attr(Attr::kKernelH, 3);
  conv.set_attr(Attr::kKernelW, 3);
  conv.set_attr(Attr::kStrideH, 1);
  conv.set_attr(Attr::kStrideW, 1);
  conv.set_attr(Attr::kPadH, 1);
  conv.set_attr(Attr::kPadW, 1);
  conv.set_attr(Attr::kOutFeatures, 8);
  const auto g = Build({MakeNode("input", {}, {1, 3, 32, 32}), conv}, {1});
  EXPECT_EQ(g.nodes[1].out_shape, (Shape{1, 8, 32, 32}));
}

TEST(InferShapes, ConvStrideAndDilation) {
  // (15 + 2*0 - 2*(3-1) - 1) / 2 + 1 = 6, (9 + 2*1 - 1*(1-1) - 1) / 3 + 1 = 4.
  IRNode conv = MakeNode("conv2d", {0});
  conv.set_attr(Attr::kKernelH, 3);
  conv.set_attr(Attr::kKernelW, 1);
  conv.set_attr(Attr::kStrideH, 2);
  conv.set_attr(Attr::kStrideW, 3);
  conv.set_attr(Attr::kPadW, 1);
  conv.set_attr(Attr::kDilationH, 2);
  conv.set_attr(Attr::kOutFeatures, 4);
  const auto g = Build({MakeNode("input", {}, {2, 1, 15, 9}), conv}, {1});
  EXPECT_EQ(g.nodes[1].out_shape, (Shape{2, 4, 6, 4}));
}

TEST(InferShapes, Dense) {
  IRNode dense = MakeNode("dense", {0});
  dense.set_attr(Attr::kOutFeatures, 10);
  const auto g = Build({MakeNode("input", {}, {4, 128}), dense}, {1});
  EXPECT_EQ(g.nodes[1].out_shape, (Shape{4, 10}));
}

TEST(InferShapes, AddMismatch) {
  IRNode pool = MakeNode("maxpool2d", {0});
  pool.set_attr(Attr::kKernelH, 2);
  pool.set_attr(Attr::kKernelW, 2);
  pool.set_attr(Attr::kStrideH, 2);
  pool.set_attr(Attr::kStrideW, 2);
  EXPECT_EQ(ErrorOf([&] {
              Build({MakeNode("input", {}, {1, 8, 16, 16}), pool, MakeNode("add", {0, 1})}, {2});
            }),
            ErrorCode::kShapeMismatch);
}

TEST(InferShapes, ConcatSumsChannels) {
  const auto g = Build({MakeNode("input", {}, {1, 3, 4, 4}), MakeNode("relu", {0}),
                        MakeNode("concat", {0, 1, 0})},
                       {2});
  EXPECT_EQ(g.nodes[2].out_shape, (Shape{1, 9, 4, 4}));
}

TEST(InferShapes, MissingAttributes) {
  EXPECT_EQ(ErrorOf([] { Build({MakeNode("input", {}, {1, 3, 4, 4}), MakeNode("conv2d", {0})}, {1}); }),
            ErrorCode::kUnderspecified);
  EXPECT_EQ(ErrorOf([] { Build({MakeNode("input", {}, {1, 3}), MakeNode("dense", {0})}, {1}); }),
            ErrorCode::kUnderspecified);
  EXPECT_EQ(ErrorOf([] { Build({MakeNode("input")}, {0}); }), ErrorCode::kUnderspecified);
}

TEST(InferShapes, ExplicitShapeMustAgree) {
  EXPECT_EQ(ErrorOf([] {
              Build({MakeNode("input", {}, {1, 3}), MakeNode("relu", {0}, {1, 4})}, {1});
            }),
            ErrorCode::kShapeMismatch);
}

TEST(InferShapes, Idempotent) {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto g = RandomGraph(rng, 12);
    EXPECT_EQ(InferShapes(g), g);
  }
}

TEST(WithBatchSize, RescalesEveryShape) {
  const auto g = BuildZooModel({ZooFamily::kResnetish, 3, 8, 2, 16, 5});
  const auto g8 = WithBatchSize(g, 8);
  EXPECT_EQ(g8.batch_size, 8);
  ASSERT_EQ(g8.nodes.size(), g.nodes.size());
  for (size_t i = 0; i < g.nodes.size(); ++i) {
    EXPECT_EQ(g8.nodes[i].out_shape[0], 8);
    EXPECT_EQ(ElementCount(g8.nodes[i].out_shape), 4 * ElementCount(g.nodes[i].out_shape));
  }
}

TEST(GraphJson, RoundTripRandomGraphs) {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const auto g = RandomGraph(rng, 16);
    const std::string text = SerializeGraphJson(g);
    const auto back = ParseGraphJson(text);
    EXPECT_EQ(back, g);
    EXPECT_EQ(SerializeGraphJson(back), text);
  }
}

TEST(GraphJson, ShuffledDocumentParsesToSameStructure) {
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const auto g = RandomGraph(rng, 12);
    const auto parsed = ParseGraphJson(ShuffledDocument(g, rng));
    ASSERT_EQ(parsed.nodes.size(), g.nodes.size());
    std::map<std::string, int> a, b;
    for (const auto& n : g.nodes) ++a[n.raw_name + ShapeToString(n.out_shape)];
    for (const auto& n : parsed.nodes) ++b[n.raw_name + ShapeToString(n.out_shape)];
    EXPECT_EQ(a, b);
  }
}

TEST(Zoo, MlpDepthOne) {
  const auto g = BuildZooModel({ZooFamily::kMlp, 1, 8, 1, 8, 0});
  int ops = 0;
  for (const auto& n : g.nodes) ops += n.is_operator() ? 1 : 0;
  EXPECT_EQ(ops, 2);
  std::vector<OperatorKind> kinds;
  for (const auto& n : g.nodes) {
    if (n.is_operator()) kinds.push_back(n.kind);
  }
  EXPECT_EQ(kinds, (std::vector<OperatorKind>{OperatorKind::kDense, OperatorKind::kRelu}));
}

std::map<OperatorKind, int> KindCounts(const ComputationGraph& g) {
  std::map<OperatorKind, int> counts;
  for (const auto& n : g.nodes) {
    if (n.is_operator()) ++counts[n.kind];
  }
  return counts;
}

TEST(Zoo, VggishDepthTwo) {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    auto counts = KindCounts(BuildZooModel({ZooFamily::kVggish, 2, 16, 4, 32, seed}));
    EXPECT_EQ(counts[OperatorKind::kConv2d], 2);
    EXPECT_EQ(counts[OperatorKind::kMaxPool2d], 2);
    EXPECT_GE(counts[OperatorKind::kRelu], 3);
    EXPECT_EQ(counts[OperatorKind::kDense], 2);
    EXPECT_EQ(counts[OperatorKind::kAdd], 0);
  }
}

TEST(Zoo, ResnetishAddsSkips) {
  auto counts = KindCounts(BuildZooModel({ZooFamily::kResnetish, 4, 8, 1, 64, 1}));
  EXPECT_EQ(counts[OperatorKind::kConv2d], 4);
  EXPECT_EQ(counts[OperatorKind::kAdd], 3);
}

TEST(Zoo, Deterministic) {
  const ZooSpec spec{ZooFamily::kResnetish, 5, 16, 8, 32, 99};
  EXPECT_EQ(SerializeGraphJson(BuildZooModel(spec)), SerializeGraphJson(BuildZooModel(spec)));
}

TEST(Zoo, InvalidSpecs) {
  for (const ZooSpec& spec : {ZooSpec{ZooFamily::kMlp, 0, 8, 1, 8, 0},
                              ZooSpec{ZooFamily::kMlp, 1, 0, 1, 8, 0},
                              ZooSpec{ZooFamily::kMlp, 1, 8, 0, 8, 0},
                              ZooSpec{ZooFamily::kVggish, 1, 8, 1, 12, 0},
                              ZooSpec{ZooFamily::kVggish, 1, 8, 1, 4, 0},
                              ZooSpec{ZooFamily::kVggish, 1, 8, 1, 512, 0}}) {
    EXPECT_EQ(ErrorOf([&] { BuildZooModel(spec); }), ErrorCode::kInvalidSpec);
  }
}

TEST(Zoo, EverySpecSurvivesParseAndInference) {
  Rng rng(21);
  for (int i = 0; i < 150; ++i) {
    ZooSpec spec;
    spec.family = static_cast<ZooFamily>(rng.UniformInt(3));
    spec.depth = 1 + static_cast<int>(rng.UniformInt(8));
    spec.width = 1 + static_cast<int>(rng.UniformInt(40));
    spec.batch_size = 1 + static_cast<int64_t>(rng.UniformInt(16));
    spec.input_hw = 8 << rng.UniformInt(4);
    spec.seed = rng.NextU64();
    const auto g = BuildZooModel(spec);
    EXPECT_NO_THROW(ValidateGraph(g));
    EXPECT_EQ(InferShapes(g), g);
    EXPECT_EQ(ParseGraphJson(SerializeGraphJson(g)), g);
  }
}

}  // namespace
}  // namespace dippm
