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

#include "dippm/mig.h"

#include <array>
#include <cmath>

#include "dippm/error.h"

namespace dippm {
namespace {

constexpr double kMbPerGb = 1024.0;

constexpr std::array<MigProfile, 4> kProfiles = {
    MigProfile::k1g5gb, MigProfile::k2g10gb, MigProfile::k3g20gb, MigProfile::k7g40gb};

}  // namespace

std::span<const MigProfile> AllMigProfiles() { return kProfiles; }

std::string_view MigProfileName(MigProfile profile) {
  switch (profile) {
    case MigProfile::k1g5gb: return "1g.5gb";
    case MigProfile::k2g10gb: return "2g.10gb";
    case MigProfile::k3g20gb: return "3g.20gb";
    case MigProfile::k7g40gb: return "7g.40gb";
  }
  return "unknown";
}

double MigProfileMaxMemoryMb(MigProfile profile) {
  switch (profile) {
    case MigProfile::k1g5gb: return 5 * kMbPerGb;
    case MigProfile::k2g10gb: return 10 * kMbPerGb;
    case MigProfile::k3g20gb: return 20 * kMbPerGb;
    case MigProfile::k7g40gb: return 40 * kMbPerGb;
  }
  return 0.0;
}

std::optional<MigProfile> SelectMigProfile(double alpha_mb) {
  if (!std::isfinite(alpha_mb)) Fail(ErrorCode::kNonFinite, "predicted memory is not finite");
  if (alpha_mb <= 0.0) return std::nullopt;
  for (MigProfile profile : kProfiles) {
    if (alpha_mb <= MigProfileMaxMemoryMb(profile)) return profile;
  }
  return std::nullopt;
}

}  // namespace dippm
