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

#ifndef DIPPM_MIG_H_
#define DIPPM_MIG_H_

#include <optional>
#include <span>
#include <string_view>

namespace dippm {

/// A100 40GB Multi-Instance GPU profiles, ordered by memory ceiling.
enum class MigProfile { k1g5gb, k2g10gb, k3g20gb, k7g40gb };

std::span<const MigProfile> AllMigProfiles();
std::string_view MigProfileName(MigProfile profile);
/// Memory ceiling in MB (1 GB = 1024 MB).
double MigProfileMaxMemoryMb(MigProfile profile);

/// Smallest profile whose ceiling holds `alpha_mb`, treating the predicted
/// memory as an upper bound: (0, 5120] -> 1g.5gb, (5120, 10240] -> 2g.10gb,
/// (10240, 20480] -> 3g.20gb, (20480, 40960] -> 7g.40gb, otherwise none.
/// Throws kNonFinite for NaN/Inf.
std::optional<MigProfile> SelectMigProfile(double alpha_mb);

}  // namespace dippm

#endif  // DIPPM_MIG_H_
