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

#include "dippm/dataset.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>

#include "test_support.h"

namespace dippm {
namespace {

using ::dippm::testing::Build;
using ::dippm::testing::ErrorOf;
using ::dippm::testing::MakeNode;
using ::dippm::testing::RandomGraph;
using ::dippm::testing::TryAppend;

std::string TempPath(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("dippm_dataset_" + name)).string();
}

// Longest operator path, in edges, by enumerating every path from every
// node. Exponential, fine for small graphs.
int EnumeratedDepth(const ComputationGraph& g) {
  std::function<int(int)> longest_from_ops = [&](int id) -> int {
    // Most operators on any path that ends at `id`.
    const IRNode& node = g.node(id);
    int best = 0;
    for (int in : node.inputs) best = std::max(best, longest_from_ops(in));
    return best + (node.is_operator() ? 1 : 0);
  };
  int most = 0;
  for (const auto& node : g.nodes) most = std::max(most, longest_from_ops(node.id));
  return std::max(0, most - 1);
}

// Independent evaluation of the synthetic cost model.
TargetVector ExpectedLabels(const ComputationGraph& g, int64_t macs) {
  double n_op = 0, weights = 0, peak = 0;
  for (const auto& node : g.nodes) {
    if (!node.is_operator()) continue;
    n_op += 1;
    double elems = 1;
    for (int64_t d : node.out_shape) elems *= static_cast<double>(d);
    peak = std::max(peak, elems);
    if (node.inputs.empty()) continue;
    const Shape& in = g.node(node.inputs[0]).out_shape;
    const double groups = std::max(1.0, node.attr(Attr::kGroups));
    const double taps = node.attr(Attr::kKernelH) * node.attr(Attr::kKernelW);
    if (node.kind == OperatorKind::kConv2d) {
      weights += static_cast<double>(node.out_shape[1]) * static_cast<double>(in[1]) / groups * taps;
    } else if (node.kind == OperatorKind::kConv2dTranspose) {
      weights += static_cast<double>(in[1]) * static_cast<double>(node.out_shape[1]) / groups * taps;
    } else if (node.kind == OperatorKind::kDense) {
      weights += static_cast<double>(in.back()) * static_cast<double>(node.out_shape.back());
    }
  }
  const double m = static_cast<double>(macs);
  TargetVector y;
  y.latency_ms = 0.05 * n_op + m / 1e8 + 0.2 * EnumeratedDepth(g);
  y.memory_mb = 600 + 4 * (weights + peak) / 1048576.0;
  y.energy_j = 0.25 * y.latency_ms * (1 + m / 1e9);
  return y;
}

TEST(OracleLabels, SingletonRelu) {
  const auto y = OracleLabels(Build({MakeNode("relu", {}, {1, 8})}, {0}));
  EXPECT_DOUBLE_EQ(y.latency_ms, 0.05);
  EXPECT_DOUBLE_EQ(y.memory_mb, 600 + 4 * 8 / 1048576.0);
  EXPECT_DOUBLE_EQ(y.energy_j, 0.25 * 0.05);
}

TEST(OracleLabels, MatchesIndependentEvaluation) {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const auto g = RandomGraph(rng, 12);
    const auto y = OracleLabels(g);
    const auto e = ExpectedLabels(g, ComputeMacs(g));
    EXPECT_NEAR(y.latency_ms, e.latency_ms, 1e-12 * e.latency_ms);
    EXPECT_NEAR(y.memory_mb, e.memory_mb, 1e-12 * e.memory_mb);
    EXPECT_NEAR(y.energy_j, e.energy_j, 1e-12 * e.energy_j);
    EXPECT_EQ(OperatorDepth(g), EnumeratedDepth(g));
    EXPECT_TRUE(y.IsValid());
    EXPECT_GT(y.memory_mb, 600.0);
  }
}

TEST(OracleLabels, ExtraReluAddsOpAndDepth) {
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const auto g = RandomGraph(rng, 10);
    ComputationGraph h = g;
    const int tail = TryAppend(h, MakeNode("relu", {g.outputs[0]}));
    ASSERT_GE(tail, 0);
    h.outputs[0] = tail;
    const auto a = OracleLabels(g);
    const auto b = OracleLabels(h);
    const int depth_delta = OperatorDepth(h) - OperatorDepth(g);
    EXPECT_NEAR(b.latency_ms - a.latency_ms, 0.05 + 0.2 * depth_delta, 1e-9);
    EXPECT_GT(b.latency_ms, a.latency_ms);
    EXPECT_GE(b.memory_mb, a.memory_mb);
  }
}

TEST(OracleLabels, DepthSeparatesGraphsWithEqualStaticFeatures) {
  // Two relus in sequence versus two relus in parallel.
  const auto chain = Build({MakeNode("input", {}, {1, 4}), MakeNode("relu", {0}), MakeNode("relu", {1}),
                            MakeNode("softmax", {2})},
                           {3});
  const auto wide = Build({MakeNode("input", {}, {1, 4}), MakeNode("relu", {0}), MakeNode("relu", {0}),
                           MakeNode("softmax", {2}), MakeNode("add", {1, 3})},
                          {4});
  const auto wide_fs = ComputeStaticFeatures(wide);
  const auto chain_fs = ComputeStaticFeatures(chain);
  EXPECT_EQ(wide_fs.t_relu, chain_fs.t_relu);
  EXPECT_EQ(wide_fs.macs, chain_fs.macs);
  EXPECT_NE(OracleLabels(chain).latency_ms, OracleLabels(wide).latency_ms);
}

TEST(SynthDataset, Deterministic) {
  const auto mix = DefaultFamilyMix();
  const auto a = SynthDataset(10, mix, 7);
  const auto b = SynthDataset(10, mix, 7);
  ASSERT_EQ(a.size(), 10u);
  for (size_t i = 0; i < a.size(); ++i) EXPECT_EQ(RecordToJsonLine(a[i]), RecordToJsonLine(b[i]));
  const auto c = SynthDataset(10, mix, 8);
  EXPECT_NE(RecordToJsonLine(a[0]) + RecordToJsonLine(a[1]), RecordToJsonLine(c[0]) + RecordToJsonLine(c[1]));
}

TEST(SynthDataset, RecordsAreWellFormed) {
  for (const auto& r : SynthDataset(60, DefaultFamilyMix(), 3)) {
    EXPECT_TRUE(r.target.IsValid());
    EXPECT_NO_THROW(ValidateEncoding(r.encoding));
    EXPECT_GE(r.encoding.num_nodes, 1);
  }
}

TEST(SynthDataset, MlpOnlyHasNoConvolutions) {
  for (const auto& r : SynthDataset(30, ParseFamilyMix("mlp"), 5)) EXPECT_EQ(r.fs.t_conv, 0);
}

TEST(FamilyMix, Parsing) {
  const auto mix = ParseFamilyMix("mlp:2,vggish");
  ASSERT_EQ(mix.size(), 2u);
  EXPECT_EQ(mix[0].family, ZooFamily::kMlp);
  EXPECT_EQ(mix[0].weight, 2.0);
  EXPECT_EQ(mix[1].weight, 1.0);
  EXPECT_EQ(ErrorOf([] { ParseFamilyMix("transformer"); }), ErrorCode::kInvalidSpec);
  EXPECT_EQ(ErrorOf([] { ParseFamilyMix("mlp:-1"); }), ErrorCode::kInvalidSpec);
  EXPECT_EQ(ErrorOf([] { ParseFamilyMix(""); }), ErrorCode::kInvalidSpec);
}

TEST(Split, Sizes) {
  SplitSpec spec;
  auto s = ComputeSplitSizes(100, spec);
  EXPECT_EQ(s.train, 70u);
  EXPECT_EQ(s.val, 15u);
  EXPECT_EQ(s.test, 15u);
  s = ComputeSplitSizes(10, spec);
  EXPECT_EQ(s.train, 7u);
  EXPECT_EQ(s.val, 2u);
  EXPECT_EQ(s.test, 1u);
  s = ComputeSplitSizes(3, spec);
  EXPECT_EQ(s.train, 1u);
  EXPECT_EQ(s.val, 1u);
  EXPECT_EQ(s.test, 1u);
  s = ComputeSplitSizes(1000, spec);
  EXPECT_EQ(s.train, 700u);
  EXPECT_EQ(s.val, 150u);
  EXPECT_EQ(s.test, 150u);
}

TEST(Split, TooFew) {
  EXPECT_EQ(ErrorOf([] { ComputeSplitSizes(2, SplitSpec{}); }), ErrorCode::kTooFew);
  EXPECT_EQ(ErrorOf([] { Split(SynthDataset(2, DefaultFamilyMix(), 1), SplitSpec{}); }), ErrorCode::kTooFew);
}

TEST(Split, PartitionProperty) {
  std::vector<DatasetRecord> pool = SynthDataset(40, DefaultFamilyMix(), 9);
  for (size_t i = 0; i < pool.size(); ++i) pool[i].model_name = "m" + std::to_string(i);
  for (size_t n = 3; n <= pool.size(); ++n) {
    for (uint64_t seed = 0; seed < 5; ++seed) {
      std::vector<DatasetRecord> records(pool.begin(), pool.begin() + static_cast<long>(n));
      SplitSpec spec;
      spec.seed = seed;
      const auto sizes = ComputeSplitSizes(n, spec);
      const auto split = Split(records, spec);
      EXPECT_EQ(split.train.size(), sizes.train);
      EXPECT_EQ(split.val.size(), sizes.val);
      EXPECT_EQ(split.test.size(), sizes.test);
      EXPECT_GE(split.train.size(), 1u);
      EXPECT_GE(split.val.size(), 1u);
      EXPECT_GE(split.test.size(), 1u);
      std::multiset<std::string> seen;
      for (const auto* part : {&split.train, &split.val, &split.test}) {
        for (const auto& r : *part) seen.insert(r.model_name);
      }
      std::multiset<std::string> expected;
      for (const auto& r : records) expected.insert(r.model_name);
      EXPECT_EQ(seen, expected);
    }
  }
}

TEST(Split, SeedControlsMembership) {
  const auto records = SynthDataset(30, DefaultFamilyMix(), 4);
  SplitSpec spec;
  spec.seed = 5;
  const auto a = Split(records, spec);
  const auto b = Split(records, spec);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
}

TEST(Split, RejectsBadFractions) {
  SplitSpec spec;
  spec.train_frac = 0.8;
  EXPECT_EQ(ErrorOf([&] { ComputeSplitSizes(10, spec); }), ErrorCode::kInvalidArgument);
}

TEST(Mape, Examples) {
  const TargetVector actual{100, 200, 300};
  std::vector<TargetVector> a = {actual};
  auto m = Mape(a, a);
  EXPECT_EQ(m.overall, 0.0);
  std::vector<TargetVector> p = {{90, 200, 300}};
  m = Mape(p, a);
  EXPECT_DOUBLE_EQ(m.latency, 0.10);
  EXPECT_EQ(m.memory, 0.0);
  EXPECT_EQ(m.energy, 0.0);
  EXPECT_NEAR(m.overall, 0.1 / 3, 1e-15);
}

TEST(Mape, Errors) {
  std::vector<TargetVector> a = {{0, 1, 1}};
  EXPECT_EQ(ErrorOf([&] { Mape(a, a); }), ErrorCode::kZeroActual);
  std::vector<TargetVector> b = {{1, 1, 1}, {1, 1, 1}};
  std::vector<TargetVector> c = {{1, 1, 1}};
  EXPECT_EQ(ErrorOf([&] { Mape(b, c); }), ErrorCode::kLengthMismatch);
  EXPECT_EQ(ErrorOf([&] { Mape({}, {}); }), ErrorCode::kLengthMismatch);
}

TEST(Mape, NonNegativeAndZeroOnlyWhenExact) {
  Rng rng(6);
  for (int i = 0; i < 100; ++i) {
    std::vector<TargetVector> actual, pred;
    for (int k = 0; k < 4; ++k) {
      actual.push_back(::dippm::testing::RandomTarget(rng));
      pred.push_back(actual.back());
    }
    EXPECT_EQ(Mape(pred, actual).overall, 0.0);
    pred[rng.UniformInt(4)].energy_j *= 1.0 + rng.Uniform(1e-9, 1.0);
    EXPECT_GT(Mape(pred, actual).overall, 0.0);
  }
}

TEST(Jsonl, RoundTrip) {
  const auto records = SynthDataset(25, DefaultFamilyMix(), 11);
  const std::string path = TempPath("rt.jsonl");
  WriteDataset(records, path);
  const auto back = ReadDataset(path);
  EXPECT_EQ(back, records);
  const std::string path2 = TempPath("rt2.jsonl");
  WriteDataset(back, path2);
  std::ifstream f1(path), f2(path2);
  EXPECT_EQ(std::string(std::istreambuf_iterator<char>(f1), {}), std::string(std::istreambuf_iterator<char>(f2), {}));
  std::filesystem::remove(path);
  std::filesystem::remove(path2);
}

TEST(Jsonl, EmptyFile) {
  const std::string path = TempPath("empty.jsonl");
  std::ofstream(path).close();
  EXPECT_TRUE(ReadDataset(path).empty());
  std::filesystem::remove(path);
}

TEST(Jsonl, MissingTargetReportsLine) {
  const auto records = SynthDataset(3, DefaultFamilyMix(), 12);
  auto doc = nlohmann::ordered_json::parse(RecordToJsonLine(records[1]));
  doc.erase("y");
  const std::string path = TempPath("missing_y.jsonl");
  {
    std::ofstream out(path);
    out << RecordToJsonLine(records[0]) << '\n' << doc.dump() << '\n' << RecordToJsonLine(records[2]) << '\n';
  }
  try {
    ReadDataset(path);
    ADD_FAILURE() << "expected MalformedRecord";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedRecord);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  std::filesystem::remove(path);
}

TEST(Jsonl, RejectsBadEncodings) {
  const auto records = SynthDataset(1, ParseFamilyMix("vggish"), 13);
  auto doc = nlohmann::ordered_json::parse(RecordToJsonLine(records[0]));
  doc["edges"].push_back({0, 999});
  EXPECT_EQ(ErrorOf([&] { RecordFromJsonLine(doc.dump(), 1); }), ErrorCode::kMalformedRecord);
  EXPECT_EQ(ErrorOf([] { RecordFromJsonLine("{not json", 1); }), ErrorCode::kMalformedRecord);
}

TEST(Jsonl, UnwritablePath) {
  const auto records = SynthDataset(1, DefaultFamilyMix(), 14);
  EXPECT_EQ(ErrorOf([&] { WriteDataset(records, "/nonexistent-dir/x.jsonl"); }), ErrorCode::kIoFailure);
  EXPECT_EQ(ErrorOf([] { ReadDataset("/nonexistent-dir/x.jsonl"); }), ErrorCode::kIoFailure);
}

}  // namespace
}  // namespace dippm
