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

#ifndef DIPPM_ZOO_H_
#define DIPPM_ZOO_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "dippm/graph_ir.h"

namespace dippm {

enum class ZooFamily { kMlp, kVggish, kResnetish };

std::string_view ZooFamilyName(ZooFamily family);
std::optional<ZooFamily> ZooFamilyFromName(std::string_view name);

struct ZooSpec {
  ZooFamily family = ZooFamily::kMlp;
  int depth = 1;
  int width = 8;
  int64_t batch_size = 1;
  // Spatial size of the image input; also sets the feature count of mlp inputs.
  int input_hw = 8;
  uint64_t seed = 0;
};

void ValidateZooSpec(const ZooSpec& spec);

/// Builds a parametric model deterministically from `spec`:
///
///   mlp        input [B, hw*hw], then depth x [dense, relu].
///   vggish     input [B, 3, hw, hw], depth x [conv2d, relu, maxpool2d], then
///              reshape, dense, relu, dense(10).
///   resnetish  as vggish, with an `add` skip (block input + relu output) in
///              every block whose input shape matches its output, i.e. every
///              block after the first.
///
/// The seed picks per-block conv kernel sizes (1, 3 or 5, same padding) and
/// per-layer mlp widths (width or 2*width).
ComputationGraph BuildZooModel(const ZooSpec& spec);

}  // namespace dippm

#endif  // DIPPM_ZOO_H_
