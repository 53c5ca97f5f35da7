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

#ifndef DIPPM_CLI_H_
#define DIPPM_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "dippm/gnn.h"
#include "dippm/mig.h"

namespace dippm {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct PredictReport {
  TargetVector prediction;
  std::optional<MigProfile> mig;
  std::string model_name;
  std::string vocab_version;
};

PredictReport MakePredictReport(const DippmModel& model, const ComputationGraph& graph);
/// {"latency_ms", "memory_mb", "energy_j", "mig", "model_name", "vocab_version"}
std::string PredictReportToJson(const PredictReport& report);

/// Runs `dippm <subcommand> ...`. Machine-readable results go to `out`,
/// diagnostics to `err`. Returns 0 on success, 1 on runtime failure, 2 on
/// usage errors.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dippm

#endif  // DIPPM_CLI_H_
