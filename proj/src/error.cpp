// Copyright 2026 The loadfl Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#include "loadfl/error.hpp"

namespace loadfl {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kMalformedRow: return "MalformedRow";
    case ErrorKind::kEmptyResult: return "EmptyResult";
    case ErrorKind::kNonMonotonicTimestamps: return "NonMonotonicTimestamps";
    case ErrorKind::kSeriesTooShort: return "SeriesTooShort";
    case ErrorKind::kZeroVariance: return "ZeroVariance";
    case ErrorKind::kDegenerateSplit: return "DegenerateSplit";
    case ErrorKind::kTooFewSamples: return "TooFewSamples";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kBudgetOutOfRange: return "BudgetOutOfRange";
    case ErrorKind::kPlaintextOutOfRange: return "PlaintextOutOfRange";
    case ErrorKind::kKeyMismatch: return "KeyMismatch";
    case ErrorKind::kMagnitudeOverflow: return "MagnitudeOverflow";
    case ErrorKind::kRoleMismatch: return "RoleMismatch";
    case ErrorKind::kEmptyUpdateSet: return "EmptyUpdateSet";
    case ErrorKind::kInvalidWeights: return "InvalidWeights";
    case ErrorKind::kLengthMismatch: return "LengthMismatch";
    case ErrorKind::kAllTargetsZero: return "AllTargetsZero";
    case ErrorKind::kPreconditionUnsatisfied: return "PreconditionUnsatisfied";
    case ErrorKind::kConfig: return "ConfigError";
    case ErrorKind::kIo: return "IoError";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

ErrorClass error_class(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
    case ErrorKind::kBudgetOutOfRange:
      return ErrorClass::kConfig;
    case ErrorKind::kMalformedRow:
    case ErrorKind::kEmptyResult:
    case ErrorKind::kNonMonotonicTimestamps:
    case ErrorKind::kSeriesTooShort:
    case ErrorKind::kZeroVariance:
    case ErrorKind::kDegenerateSplit:
    case ErrorKind::kTooFewSamples:
    case ErrorKind::kIo:
      return ErrorClass::kData;
    default:
      return ErrorClass::kRuntime;
  }
}

}  // namespace loadfl
