/*
 * Copyright 2026 The truckctl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace truckctl {

enum class ErrorCode {
  kTooFewWaypoints,
  kDegenerateSegment,
  kAmbiguousProjection,
  kInvalidGear,
  kNonFiniteResidual,
  kSingularFramework,
  kNonFiniteState,
  kConfigError,
  kInvalidSpec,
  kInvalidArgument,
  kIoError,
};

std::string_view ErrorCodeName(ErrorCode code);

// Every recoverable failure in the library is reported as an Error carrying a
// machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kTooFewWaypoints:
      return "TooFewWaypoints";
    case ErrorCode::kDegenerateSegment:
      return "DegenerateSegment";
    case ErrorCode::kAmbiguousProjection:
      return "AmbiguousProjection";
    case ErrorCode::kInvalidGear:
      return "InvalidGear";
    case ErrorCode::kNonFiniteResidual:
      return "NonFiniteResidual";
    case ErrorCode::kSingularFramework:
      return "SingularFramework";
    case ErrorCode::kNonFiniteState:
      return "NonFiniteState";
    case ErrorCode::kConfigError:
      return "ConfigError";
    case ErrorCode::kInvalidSpec:
      return "InvalidSpec";
    case ErrorCode::kInvalidArgument:
      return "InvalidArgument";
    case ErrorCode::kIoError:
      return "IoError";
  }
  return "Unknown";
}

}  // namespace truckctl
