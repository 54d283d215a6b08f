// Copyright 2026 The mgsmooth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MGSMOOTH_ERROR_H_
#define MGSMOOTH_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace mgsmooth {

enum class ErrorCode {
  kDimensionMismatch,
  kInvalidDistribution,
  kInvalidDiscount,
  kInvalidArgument,
  kEmptyInput,
  kWeightMismatch,
  kAllWeightsZero,
  kZeroWeight,
  kPolicyShapeMismatch,
  kDegenerateInput,
  kShapeMismatch,
  kLogOfNonPositive,
  kSingularDenominator,
  kNonFiniteLoss,
  kNonFiniteGradient,
  kModelStepFailure,
  kConfigError,
  kIoError,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures surface as this exception type; callers switch on
// code() when they need to distinguish usage errors from numerical ones.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

  // True for failures caused by numerics rather than by bad input.
  bool is_numerical() const {
    return code_ == ErrorCode::kSingularDenominator ||
           code_ == ErrorCode::kNonFiniteLoss ||
           code_ == ErrorCode::kNonFiniteGradient ||
           code_ == ErrorCode::kModelStepFailure ||
           code_ == ErrorCode::kDegenerateInput;
  }

 private:
  ErrorCode code_;
};

}  // namespace mgsmooth

#endif  // MGSMOOTH_ERROR_H_
