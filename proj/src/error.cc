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

#include "dippm/error.h"

namespace dippm {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedDocument: return "MalformedDocument";
    case ErrorCode::kCyclicGraph: return "CyclicGraph";
    case ErrorCode::kDanglingReference: return "DanglingReference";
    case ErrorCode::kBadShape: return "BadShape";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kUnderspecified: return "Underspecified";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kEmptyGraph: return "EmptyGraph";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kTooFew: return "TooFew";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kZeroActual: return "ZeroActual";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code) {}

void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace dippm
