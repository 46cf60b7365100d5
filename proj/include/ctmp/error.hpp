// Copyright 2026 The ctmp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CTMP_ERROR_HPP
#define CTMP_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace ctmp {

enum class ErrorCode {
  kInvalidProblem,
  kParse,
  kSingularKkt,
  kNonFinite,
  kDegenerate,
  kNoConvergence,
  kTimesCollapsed,
  kTimeEscaped,
  kInfeasible,
  kNoStructure,
  kTooFewSamples,
  kSameStructure,
  kNonAffineBoundary,
  kBudget,
  kUnsupported,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// A switching time left (0, T) during shooting. Carries which event escaped
// and where it went, so callers can reshape the arc structure.
class TimeEscapedError : public Error {
 public:
  TimeEscapedError(int event, double time, const std::string& what)
      : Error(ErrorCode::kTimeEscaped, what), event_(event), time_(time) {}

  int event() const noexcept { return event_; }
  double time() const noexcept { return time_; }

 private:
  int event_;
  double time_;
};

// No admissible control; `row` is the constraint that could not be enforced.
class InfeasibleError : public Error {
 public:
  InfeasibleError(int row, const std::string& what)
      : Error(ErrorCode::kInfeasible, what), row_(row) {}

  int row() const noexcept { return row_; }

 private:
  int row_;
};

}  // namespace ctmp

#endif  // CTMP_ERROR_HPP
