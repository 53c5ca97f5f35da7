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

#ifndef DIPPM_ERROR_H_
#define DIPPM_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace dippm {

enum class ErrorCode {
  kMalformedDocument,
  kCyclicGraph,
  kDanglingReference,
  kBadShape,
  kShapeMismatch,
  kUnderspecified,
  kInvalidSpec,
  kEmptyGraph,
  kNonFinite,
  kEmptyDataset,
  kIoFailure,
  kVersionMismatch,
  kMalformedRecord,
  kTooFew,
  kLengthMismatch,
  kZeroActual,
  kInvalidArgument,
};

std::string_view ErrorCodeName(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void Fail(ErrorCode code, const std::string& message);

}  // namespace dippm

#endif  // DIPPM_ERROR_H_
