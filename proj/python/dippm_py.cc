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

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "dippm/cli.h"
#include "dippm/dataset.h"
#include "dippm/error.h"
#include "dippm/featurize.h"
#include "dippm/gnn.h"
#include "dippm/graph_ir.h"
#include "dippm/mig.h"
#include "dippm/zoo.h"

namespace py = pybind11;

namespace dippm {
namespace {

py::dict TargetDict(const TargetVector& t) {
  py::dict d;
  d["latency_ms"] = t.latency_ms;
  d["memory_mb"] = t.memory_mb;
  d["energy_j"] = t.energy_j;
  return d;
}

py::object MigName(std::optional<MigProfile> profile) {
  if (!profile) return py::none();
  return py::str(std::string(MigProfileName(*profile)));
}

ModelArch ArchFromName(const std::string& name) {
  auto arch = ModelArchFromName(name);
  if (!arch) Fail(ErrorCode::kInvalidArgument, "unknown architecture '" + name + "'");
  return *arch;
}

}  // namespace
}  // namespace dippm

PYBIND11_MODULE(_core, m) {
  using namespace dippm;  // NOLINT
  m.doc() = "Graph-based latency, memory and energy prediction for DL models.";

  static py::exception<Error> error(m, "DippmError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  py::class_<ComputationGraph>(m, "Graph")
      .def_readonly("name", &ComputationGraph::name)
      .def_readonly("batch_size", &ComputationGraph::batch_size)
      .def_readonly("outputs", &ComputationGraph::outputs)
      .def_property_readonly("num_nodes", [](const ComputationGraph& g) { return g.nodes.size(); })
      .def_property_readonly("ops",
                             [](const ComputationGraph& g) {
                               std::vector<std::string> ops;
                               for (const auto& n : g.nodes) ops.push_back(n.raw_name);
                               return ops;
                             })
      .def("to_json", &SerializeGraphJson)
      .def("with_batch_size", &WithBatchSize, py::arg("batch"))
      .def("__eq__", [](const ComputationGraph& a, const ComputationGraph& b) { return a == b; })
      .def("__repr__", [](const ComputationGraph& g) {
        return "<Graph '" + g.name + "' nodes=" + std::to_string(g.nodes.size()) +
               " batch=" + std::to_string(g.batch_size) + ">";
      });

  m.def("parse_graph", [](const std::string& text) { return InferShapes(ParseGraphJson(text)); },
        py::arg("text"), "Parse a graph document and infer every output shape.");

  m.def(
      "build_zoo_model",
      [](const std::string& family, int depth, int width, int64_t batch_size, int input_hw,
         uint64_t seed) {
        auto f = ZooFamilyFromName(family);
        if (!f) Fail(ErrorCode::kInvalidSpec, "unknown family '" + family + "'");
        return BuildZooModel({*f, depth, width, batch_size, input_hw, seed});
      },
      py::arg("family"), py::arg("depth"), py::arg("width") = 8, py::arg("batch_size") = 1,
      py::arg("input_hw") = 8, py::arg("seed") = 0);

  m.def("compute_macs", &ComputeMacs, py::arg("graph"));

  m.def(
      "static_features",
      [](const ComputationGraph& g) {
        const StaticFeatures fs = ComputeStaticFeatures(g);
        py::dict d;
        d["macs"] = fs.macs;
        d["batch"] = fs.batch;
        d["t_conv"] = fs.t_conv;
        d["t_dense"] = fs.t_dense;
        d["t_relu"] = fs.t_relu;
        return d;
      },
      py::arg("graph"));

  m.def(
      "create_graph_encoding",
      [](const ComputationGraph& g) {
        const GraphEncoding enc = CreateGraphEncoding(g);
        py::dict d;
        d["num_nodes"] = enc.num_nodes;
        d["edges"] = enc.edges;
        std::vector<std::vector<double>> rows;
        for (const auto& f : enc.features) rows.emplace_back(f.begin(), f.end());
        d["features"] = rows;
        return d;
      },
      py::arg("graph"));

  m.def("oracle_labels", [](const ComputationGraph& g) { return TargetDict(OracleLabels(g)); },
        py::arg("graph"));

  m.def("mig_profile", [](double memory_mb) { return MigName(SelectMigProfile(memory_mb)); },
        py::arg("memory_mb"));

  py::class_<DatasetRecord>(m, "Record")
      .def_readonly("model_name", &DatasetRecord::model_name)
      .def_property_readonly("target", [](const DatasetRecord& r) { return TargetDict(r.target); })
      .def_property_readonly("num_nodes", [](const DatasetRecord& r) { return r.encoding.num_nodes; })
      .def("to_json", &RecordToJsonLine)
      .def("__eq__", [](const DatasetRecord& a, const DatasetRecord& b) { return a == b; });

  m.def("make_record", &MakeRecord, py::arg("graph"));

  m.def(
      "synth_dataset",
      [](int n, uint64_t seed, const std::string& mix) {
        const auto weights = mix.empty() ? DefaultFamilyMix() : ParseFamilyMix(mix);
        py::gil_scoped_release release;
        return SynthDataset(n, weights, seed);
      },
      py::arg("n"), py::arg("seed") = 0, py::arg("mix") = "");

  m.def("write_dataset",
        [](const std::vector<DatasetRecord>& records, const std::string& path) {
          WriteDataset(records, path);
        },
        py::arg("records"), py::arg("path"));
  m.def("read_dataset", &ReadDataset, py::arg("path"));

  m.def(
      "split",
      [](std::vector<DatasetRecord> records, uint64_t seed) {
        DatasetSplit s = Split(std::move(records), {.seed = seed});
        return std::make_tuple(std::move(s.train), std::move(s.val), std::move(s.test));
      },
      py::arg("records"), py::arg("seed") = 0);

  py::class_<DippmModel>(m, "Model")
      .def_property_readonly("arch",
                             [](const DippmModel& model) { return std::string(ModelArchName(model.arch)); })
      .def_readonly("hidden", &DippmModel::hidden)
      .def("predict",
           [](const DippmModel& model, const ComputationGraph& g) {
             const PredictReport report = MakePredictReport(model, g);
             py::dict d = TargetDict(report.prediction);
             d["mig"] = MigName(report.mig);
             return d;
           },
           py::arg("graph"))
      .def("evaluate",
           [](const DippmModel& model, const std::vector<DatasetRecord>& records) {
             const MapeResult r = Evaluate(model, records);
             py::dict d;
             d["latency"] = r.latency;
             d["memory"] = r.memory;
             d["energy"] = r.energy;
             d["overall"] = r.overall;
             return d;
           },
           py::arg("records"))
      .def("save", &SaveModel, py::arg("path"))
      .def("to_json", &ModelToJson)
      .def("__eq__", [](const DippmModel& a, const DippmModel& b) { return a == b; });

  m.def("load_model", &LoadModel, py::arg("path"));

  m.def(
      "train",
      [](const std::vector<DatasetRecord>& train, const std::vector<DatasetRecord>& val, int epochs,
         uint64_t seed, int hidden, double lr, const std::string& arch, double dropout) {
        TrainConfig config;
        config.epochs = epochs;
        config.seed = seed;
        config.hidden = hidden;
        config.lr = lr;
        config.arch = ArchFromName(arch);
        config.dropout_p = dropout;
        TrainResult result;
        {
          py::gil_scoped_release release;
          result = Train(train, val, config);
        }
        py::list history;
        for (const auto& e : result.history) {
          py::dict d;
          d["epoch"] = e.epoch;
          d["train_loss"] = e.train_loss;
          d["train_mape"] = e.train_mape;
          d["val_mape"] = e.val_mape;
          d["val_loss"] = e.val_loss;
          history.append(d);
        }
        return py::make_tuple(std::move(result.model), history);
      },
      py::arg("train"), py::arg("val") = std::vector<DatasetRecord>{}, py::arg("epochs") = 10,
      py::arg("seed") = 0, py::arg("hidden") = kDefaultHidden, py::arg("lr") = kDefaultLearningRate,
      py::arg("arch") = "sage", py::arg("dropout") = kDefaultDropout);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = RunCli(args, out, err);
        }
        return std::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run the command-line tool in-process; returns (code, stdout, stderr).");
}
