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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace loadfl {

enum class ErrorKind {
  // data
  kMalformedRow,
  kEmptyResult,
  kNonMonotonicTimestamps,
  kSeriesTooShort,
  kZeroVariance,
  kDegenerateSplit,
  kTooFewSamples,
  // model / vectors
  kDimensionMismatch,
  // dp
  kBudgetOutOfRange,
  // he
  kPlaintextOutOfRange,
  kKeyMismatch,
  kMagnitudeOverflow,
  // attacks
  kRoleMismatch,
  // fed
  kEmptyUpdateSet,
  kInvalidWeights,
  // analysis
  kLengthMismatch,
  kAllTargetsZero,
  kPreconditionUnsatisfied,
  // harness
  kConfig,
  kIo,
  kInvalidArgument,
};

std::string_view to_string(ErrorKind kind);

/// Broad class of an error, used by the CLI to pick an exit code.
enum class ErrorClass { kConfig, kData, kRuntime };

ErrorClass error_class(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace loadfl
