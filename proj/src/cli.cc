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

#include "dippm/cli.h"

#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "dippm/dataset.h"
#include "dippm/error.h"
#include "dippm/featurize.h"
#include "dippm/graph_ir.h"
#include "json.hpp"

namespace dippm {
namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kSeedEnv = "DIPPM_SEED";

std::string FormatValue(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIoFailure, "cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) Fail(ErrorCode::kIoFailure, "read from '" + path + "' failed");
  return buffer.str();
}

struct DatasetArgs {
  int n = 0;
  std::string families = "mlp,vggish,resnetish";
  uint64_t seed = 0;
  std::string out;
};

struct TrainArgs {
  std::string data;
  int epochs = 10;
  uint64_t seed = 0;
  double lr = kDefaultLearningRate;
  std::string baseline;
  int hidden = kDefaultHidden;
  std::string out;
};

struct PredictArgs {
  std::string model;
  std::string graph;
  int64_t batch = 0;
};

struct EvalArgs {
  std::string model;
  std::string data;
};

int CmdDataset(const DatasetArgs& args, std::ostream& out) {
  const auto mix = ParseFamilyMix(args.families);
  const auto specs = SampleZooSpecs(args.n, mix, args.seed);
  std::vector<DatasetRecord> records;
  records.reserve(specs.size());
  std::map<std::string, int> histogram;
  for (const auto& spec : specs) {
    records.push_back(MakeRecord(BuildZooModel(spec)));
    ++histogram[std::string(ZooFamilyName(spec.family))];
  }
  WriteDataset(records, args.out);
  out << "records=" << records.size() << " path=" << args.out << '\n';
  for (const auto& [family, count] : histogram) {
    out << "family=" << family << " count=" << count << " percent="
        << FormatValue(100.0 * count / static_cast<double>(records.size())) << '\n';
  }
  return kExitOk;
}

int CmdTrain(const TrainArgs& args, std::ostream& out) {
  std::vector<DatasetRecord> records = ReadDataset(args.data);
  if (records.empty()) Fail(ErrorCode::kEmptyDataset, "dataset '" + args.data + "' is empty");
  SplitSpec split_spec;
  split_spec.seed = args.seed;
  DatasetSplit split = Split(std::move(records), split_spec);

  TrainConfig config;
  config.epochs = args.epochs;
  config.seed = args.seed;
  config.lr = args.lr;
  config.hidden = args.hidden;
  config.arch = args.baseline == "mlp" ? ModelArch::kMlp : ModelArch::kSage;
  TrainResult result = Train(split.train, split.val, config, [&out](const EpochStats& s) {
    out << "epoch=" << s.epoch << " train_mape=" << FormatValue(s.train_mape)
        << " val_mape=" << FormatValue(s.val_mape) << " train_loss=" << FormatValue(s.train_loss)
        << " val_loss=" << FormatValue(s.val_loss) << '\n'
        << std::flush;
  });
  SaveModel(result.model, args.out);
  const MapeResult test = Evaluate(result.model, split.test);
  out << "test_mape=" << FormatValue(test.overall) << " latency=" << FormatValue(test.latency)
      << " memory=" << FormatValue(test.memory) << " energy=" << FormatValue(test.energy)
      << " n_train=" << split.train.size() << " n_val=" << split.val.size()
      << " n_test=" << split.test.size() << '\n';
  return kExitOk;
}

int CmdPredict(const PredictArgs& args, std::ostream& out) {
  const DippmModel model = LoadModel(args.model);
  ComputationGraph graph = ParseGraphJson(ReadFile(args.graph));
  if (args.batch > 0) graph = WithBatchSize(graph, args.batch);
  out << PredictReportToJson(MakePredictReport(model, graph)) << '\n';
  return kExitOk;
}

int CmdEval(const EvalArgs& args, std::ostream& out) {
  const DippmModel model = LoadModel(args.model);
  const std::vector<DatasetRecord> records = ReadDataset(args.data);
  if (records.empty()) Fail(ErrorCode::kEmptyDataset, "dataset '" + args.data + "' is empty");
  const MapeResult mape = Evaluate(model, records);
  Json doc;
  doc["mape"] = {{"latency", mape.latency},
                 {"memory", mape.memory},
                 {"energy", mape.energy},
                 {"overall", mape.overall}};
  doc["n"] = records.size();
  out << doc.dump() << '\n';
  return kExitOk;
}

}  // namespace

PredictReport MakePredictReport(const DippmModel& model, const ComputationGraph& graph) {
  PredictReport report;
  report.prediction = Predict(model, CreateGraphEncoding(graph), ComputeStaticFeatures(graph));
  if (!report.prediction.IsValid()) {
    Fail(ErrorCode::kNonFinite, "prediction is not finite and positive");
  }
  report.mig = SelectMigProfile(report.prediction.memory_mb);
  report.model_name = graph.name;
  report.vocab_version = model.vocab_version;
  return report;
}

std::string PredictReportToJson(const PredictReport& report) {
  Json doc;
  doc["latency_ms"] = report.prediction.latency_ms;
  doc["memory_mb"] = report.prediction.memory_mb;
  doc["energy_j"] = report.prediction.energy_j;
  doc["mig"] = report.mig ? Json(std::string(MigProfileName(*report.mig))) : Json(nullptr);
  doc["model_name"] = report.model_name;
  doc["vocab_version"] = report.vocab_version;
  return doc.dump();
}

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Deep-learning inference performance prediction"};
  app.name("dippm");
  app.require_subcommand(1);

  DatasetArgs dataset_args;
  auto* dataset = app.add_subcommand("dataset", "Generate a synthetic JSONL dataset");
  dataset->add_option("--n", dataset_args.n, "Number of records")
      ->required()
      ->check(CLI::PositiveNumber);
  dataset->add_option("--families", dataset_args.families,
                      "Comma-separated families, optionally weighted (mlp:2,vggish:1)");
  dataset->add_option("--seed", dataset_args.seed, "Sampling seed")->envname(kSeedEnv);
  dataset->add_option("--out", dataset_args.out, "Output JSONL path")->required();

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "Train on a dataset with a 70/15/15 split");
  train->add_option("--data", train_args.data, "Input JSONL dataset")->required();
  train->add_option("--epochs", train_args.epochs, "Training epochs")->check(CLI::PositiveNumber);
  train->add_option("--seed", train_args.seed, "Seed for split, init and shuffling")
      ->envname(kSeedEnv);
  train->add_option("--lr", train_args.lr, "Adam learning rate")->check(CLI::PositiveNumber);
  train->add_option("--baseline", train_args.baseline, "Train a baseline instead of the GNN")
      ->check(CLI::IsMember({"mlp"}));
  train->add_option("--hidden", train_args.hidden, "Hidden width")->check(CLI::PositiveNumber);
  train->add_option("--out", train_args.out, "Output model path")->required();

  PredictArgs predict_args;
  auto* predict = app.add_subcommand("predict", "Predict latency, memory, energy and MIG profile");
  predict->add_option("--model", predict_args.model, "Model file")->required();
  predict->add_option("--graph", predict_args.graph, "Graph JSON file")->required();
  predict->add_option("--batch", predict_args.batch, "Override the batch size")
      ->check(CLI::PositiveNumber);

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Report per-target MAPE on a dataset");
  eval->add_option("--model", eval_args.model, "Model file")->required();
  eval->add_option("--data", eval_args.data, "JSONL dataset")->required();

  std::vector<const char*> argv;
  argv.push_back("dippm");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*dataset) return CmdDataset(dataset_args, out);
    if (*train) return CmdTrain(train_args, out);
    if (*predict) return CmdPredict(predict_args, out);
    if (*eval) return CmdEval(eval_args, out);
  } catch (const Error& e) {
    err << "dippm: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "dippm: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace dippm
