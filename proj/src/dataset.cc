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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dippm/error.h"
#include "dippm/numerics.h"
#include "json.hpp"

namespace dippm {
namespace {

using Json = nlohmann::ordered_json;

constexpr double kLatencyPerOp = 0.05;
constexpr double kLatencyPerMac = 1e-8;
constexpr double kLatencyPerDepth = 0.2;
constexpr double kMemoryBaseMb = 600.0;
constexpr double kBytesPerElement = 4.0;
constexpr double kEnergyPerLatency = 0.25;
constexpr double kEnergyMacScale = 1e9;

constexpr std::array<int, 4> kWidths = {8, 16, 32, 64};
constexpr std::array<int64_t, 7> kBatches = {1, 2, 4, 8, 16, 32, 64};
constexpr std::array<int, 4> kInputSizes = {8, 16, 32, 64};
constexpr int kMaxSampledDepth = 6;

int64_t WeightElements(const ComputationGraph& graph, const IRNode& node) {
  if (node.inputs.empty()) return 0;
  const Shape& in = graph.node(node.inputs.front()).out_shape;
  const auto groups = std::max<int64_t>(1, static_cast<int64_t>(node.attr(Attr::kGroups)));
  const auto kernel = static_cast<int64_t>(node.attr(Attr::kKernelH)) *
                      static_cast<int64_t>(node.attr(Attr::kKernelW));
  switch (node.kind) {
    case OperatorKind::kConv2d:
      return node.out_shape[1] * (in[1] / groups) * kernel;
    case OperatorKind::kConv2dTranspose:
      return in[1] * (node.out_shape[1] / groups) * kernel;
    case OperatorKind::kDense:
      return in.back() * node.out_shape.back();
    default:
      return 0;
  }
}

[[noreturn]] void BadRecord(size_t line_number, const std::string& what) {
  Fail(ErrorCode::kMalformedRecord, "line " + std::to_string(line_number) + ": " + what);
}

double PositiveFinite(const Json& y, const char* key, size_t line_number) {
  if (!y.contains(key) || !y[key].is_number()) {
    BadRecord(line_number, std::string("missing numeric y.") + key);
  }
  const double v = y[key].get<double>();
  if (!std::isfinite(v) || v <= 0.0) BadRecord(line_number, std::string("y.") + key + " must be positive");
  return v;
}

}  // namespace

bool TargetVector::IsValid() const {
  for (double v : AsArray()) {
    if (!std::isfinite(v) || v <= 0.0) return false;
  }
  return true;
}

int OperatorDepth(const ComputationGraph& graph) {
  // ops_on_path[v]: most operators on any path ending at v.
  std::vector<int> ops_on_path(graph.nodes.size(), 0);
  int longest = 0;
  for (const auto& node : graph.nodes) {
    int best = 0;
    for (int in : node.inputs) best = std::max(best, ops_on_path[static_cast<size_t>(in)]);
    const int here = best + (node.is_operator() ? 1 : 0);
    ops_on_path[static_cast<size_t>(node.id)] = here;
    longest = std::max(longest, here);
  }
  return std::max(0, longest - 1);
}

TargetVector OracleLabels(const ComputationGraph& graph) {
  const double macs = static_cast<double>(ComputeMacs(graph));
  int64_t num_ops = 0;
  int64_t weights = 0;
  int64_t peak_activation = 0;
  for (const auto& node : graph.nodes) {
    if (!node.is_operator()) continue;
    ++num_ops;
    weights += WeightElements(graph, node);
    peak_activation = std::max(peak_activation, ElementCount(node.out_shape));
  }
  TargetVector y;
  y.latency_ms = kLatencyPerOp * static_cast<double>(num_ops) + macs * kLatencyPerMac +
                 kLatencyPerDepth * OperatorDepth(graph);
  y.memory_mb = kMemoryBaseMb + kBytesPerElement *
                                    static_cast<double>(weights + peak_activation) /
                                    static_cast<double>(1 << 20);
  y.energy_j = kEnergyPerLatency * y.latency_ms * (1.0 + macs / kEnergyMacScale);
  return y;
}

DatasetRecord MakeRecord(const ComputationGraph& graph) {
  DatasetRecord record;
  record.model_name = graph.name;
  record.encoding = CreateGraphEncoding(graph);
  record.fs = ComputeStaticFeatures(graph);
  record.target = OracleLabels(graph);
  return record;
}

std::vector<FamilyWeight> DefaultFamilyMix() {
  return {{ZooFamily::kMlp, 1.0}, {ZooFamily::kVggish, 1.0}, {ZooFamily::kResnetish, 1.0}};
}

std::vector<FamilyWeight> ParseFamilyMix(const std::string& text) {
  std::vector<FamilyWeight> mix;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::string name = item;
    double weight = 1.0;
    if (auto colon = item.find(':'); colon != std::string::npos) {
      name = item.substr(0, colon);
      try {
        size_t used = 0;
        weight = std::stod(item.substr(colon + 1), &used);
        if (used != item.size() - colon - 1) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        Fail(ErrorCode::kInvalidSpec, "bad family weight in '" + item + "'");
      }
    }
    auto family = ZooFamilyFromName(name);
    if (!family) Fail(ErrorCode::kInvalidSpec, "unknown model family '" + name + "'");
    if (!(weight > 0.0) || !std::isfinite(weight)) {
      Fail(ErrorCode::kInvalidSpec, "family weight must be positive: '" + item + "'");
    }
    mix.push_back({*family, weight});
  }
  if (mix.empty()) Fail(ErrorCode::kInvalidSpec, "empty family list");
  return mix;
}

std::vector<ZooSpec> SampleZooSpecs(int n, std::span<const FamilyWeight> mix, uint64_t seed) {
  if (n < 1) Fail(ErrorCode::kInvalidSpec, "dataset size must be at least 1");
  if (mix.empty()) Fail(ErrorCode::kInvalidSpec, "empty family mix");
  double total = 0.0;
  for (const auto& fw : mix) total += fw.weight;
  Rng rng(seed, /*stream=*/0x100);
  std::vector<ZooSpec> specs;
  specs.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    ZooSpec spec;
    double pick = rng.Uniform() * total;
    spec.family = mix.back().family;
    for (const auto& fw : mix) {
      if (pick < fw.weight) {
        spec.family = fw.family;
        break;
      }
      pick -= fw.weight;
    }
    spec.depth = 1 + static_cast<int>(rng.UniformInt(kMaxSampledDepth));
    spec.width = kWidths[rng.UniformInt(kWidths.size())];
    spec.batch_size = kBatches[rng.UniformInt(kBatches.size())];
    spec.input_hw = kInputSizes[rng.UniformInt(kInputSizes.size())];
    spec.seed = rng.NextU64();
    specs.push_back(spec);
  }
  return specs;
}

std::vector<DatasetRecord> SynthDataset(int n, std::span<const FamilyWeight> mix, uint64_t seed) {
  std::vector<DatasetRecord> records;
  for (const ZooSpec& spec : SampleZooSpecs(n, mix, seed)) {
    records.push_back(MakeRecord(BuildZooModel(spec)));
  }
  return records;
}

SplitSizes ComputeSplitSizes(size_t n, const SplitSpec& spec) {
  const double sum = spec.train_frac + spec.val_frac + spec.test_frac;
  if (std::fabs(sum - 1.0) > 1e-9 || spec.train_frac < 0 || spec.val_frac < 0 ||
      spec.test_frac < 0) {
    Fail(ErrorCode::kInvalidArgument, "split fractions must be non-negative and sum to 1");
  }
  if (n < 3) Fail(ErrorCode::kTooFew, "need at least 3 records to split, got " + std::to_string(n));
  SplitSizes sizes;
  sizes.train = static_cast<size_t>(std::llround(static_cast<double>(n) * spec.train_frac));
  sizes.val = static_cast<size_t>(std::llround(static_cast<double>(n) * spec.val_frac));
  sizes.train = std::min(sizes.train, n);
  sizes.val = std::min(sizes.val, n - sizes.train);
  sizes.test = n - sizes.train - sizes.val;
  for (size_t* part : {&sizes.val, &sizes.test}) {
    if (*part == 0) {
      --sizes.train;
      *part = 1;
    }
  }
  return sizes;
}

DatasetSplit Split(std::vector<DatasetRecord> records, const SplitSpec& spec) {
  const SplitSizes sizes = ComputeSplitSizes(records.size(), spec);
  Rng rng(spec.seed, /*stream=*/0x300);
  rng.Shuffle(records);
  DatasetSplit split;
  auto begin = std::make_move_iterator(records.begin());
  split.train.assign(begin, begin + static_cast<std::ptrdiff_t>(sizes.train));
  split.val.assign(begin + static_cast<std::ptrdiff_t>(sizes.train),
                   begin + static_cast<std::ptrdiff_t>(sizes.train + sizes.val));
  split.test.assign(begin + static_cast<std::ptrdiff_t>(sizes.train + sizes.val),
                    std::make_move_iterator(records.end()));
  return split;
}

MapeResult Mape(std::span<const TargetVector> preds, std::span<const TargetVector> actuals) {
  if (preds.size() != actuals.size()) {
    Fail(ErrorCode::kLengthMismatch, std::to_string(preds.size()) + " predictions vs " +
                                         std::to_string(actuals.size()) + " actuals");
  }
  if (preds.empty()) Fail(ErrorCode::kLengthMismatch, "MAPE over zero records");
  std::array<double, kNumTargets> sums{};
  for (size_t i = 0; i < preds.size(); ++i) {
    const auto p = preds[i].AsArray();
    const auto a = actuals[i].AsArray();
    for (int t = 0; t < kNumTargets; ++t) {
      if (a[static_cast<size_t>(t)] == 0.0) {
        Fail(ErrorCode::kZeroActual, "actual value is zero at record " + std::to_string(i));
      }
      sums[static_cast<size_t>(t)] +=
          std::fabs(p[static_cast<size_t>(t)] - a[static_cast<size_t>(t)]) /
          std::fabs(a[static_cast<size_t>(t)]);
    }
  }
  const auto n = static_cast<double>(preds.size());
  MapeResult result;
  result.latency = sums[0] / n;
  result.memory = sums[1] / n;
  result.energy = sums[2] / n;
  result.overall = (result.latency + result.memory + result.energy) / 3.0;
  return result;
}

std::string RecordToJsonLine(const DatasetRecord& record) {
  Json line;
  line["name"] = record.model_name;
  Json encoding = EncodingToJson(record.encoding);
  line["x"] = std::move(encoding["x"]);
  line["edges"] = std::move(encoding["edges"]);
  line["n"] = record.encoding.num_nodes;
  line["fs"] = record.fs.AsVector();
  line["fs_raw"] = {{"macs", record.fs.macs},
                    {"batch", record.fs.batch},
                    {"t_conv", record.fs.t_conv},
                    {"t_dense", record.fs.t_dense},
                    {"t_relu", record.fs.t_relu}};
  line["y"] = {{"latency_ms", record.target.latency_ms},
               {"memory_mb", record.target.memory_mb},
               {"energy_j", record.target.energy_j}};
  return line.dump();
}

DatasetRecord RecordFromJsonLine(const std::string& text, size_t line_number) {
  Json line;
  try {
    line = Json::parse(text);
  } catch (const Json::parse_error& e) {
    BadRecord(line_number, e.what());
  }
  if (!line.is_object()) BadRecord(line_number, "record must be an object");
  for (const char* key : {"name", "x", "edges", "n", "fs_raw", "y"}) {
    if (!line.contains(key)) BadRecord(line_number, std::string("missing \"") + key + "\" field");
  }
  DatasetRecord record;
  try {
    record.model_name = line["name"].get<std::string>();
    Json encoding = {{"n", line["n"]}, {"edges", line["edges"]}, {"x", line["x"]}};
    record.encoding = EncodingFromJson(encoding);
    const Json& raw = line["fs_raw"];
    record.fs.macs = raw.at("macs").get<int64_t>();
    record.fs.batch = raw.at("batch").get<int64_t>();
    record.fs.t_conv = raw.at("t_conv").get<int64_t>();
    record.fs.t_dense = raw.at("t_dense").get<int64_t>();
    record.fs.t_relu = raw.at("t_relu").get<int64_t>();
  } catch (const Json::exception& e) {
    BadRecord(line_number, e.what());
  } catch (const Error& e) {
    BadRecord(line_number, e.what());
  }
  if (record.fs.macs < 0 || record.fs.batch < 1 || record.fs.t_conv < 0 ||
      record.fs.t_dense < 0 || record.fs.t_relu < 0) {
    BadRecord(line_number, "fs_raw values out of range");
  }
  const Json& y = line["y"];
  if (!y.is_object()) BadRecord(line_number, "\"y\" must be an object");
  record.target.latency_ms = PositiveFinite(y, "latency_ms", line_number);
  record.target.memory_mb = PositiveFinite(y, "memory_mb", line_number);
  record.target.energy_j = PositiveFinite(y, "energy_j", line_number);
  return record;
}

void WriteDataset(std::span<const DatasetRecord> records, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIoFailure, "cannot open '" + path + "' for writing");
  for (const auto& record : records) out << RecordToJsonLine(record) << '\n';
  out.flush();
  if (!out) Fail(ErrorCode::kIoFailure, "write to '" + path + "' failed");
}

std::vector<DatasetRecord> ReadDataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIoFailure, "cannot open '" + path + "' for reading");
  std::vector<DatasetRecord> records;
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    records.push_back(RecordFromJsonLine(line, line_number));
  }
  if (in.bad()) Fail(ErrorCode::kIoFailure, "read from '" + path + "' failed");
  return records;
}

}  // namespace dippm
