// Copyright 2026 The crowdplan Authors.
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

#ifndef CROWDPLAN_ERROR_H_
#define CROWDPLAN_ERROR_H_

#include <stdexcept>
#include <string>

namespace crowdplan {

// Values double as CLI exit codes.
enum class ErrorCode : int {
  kInput = 2,
  kResourceLimit = 3,
  kNumeric = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Malformed input: bad files, dimension mismatches, unknown names.
class InputError : public Error {
 public:
  explicit InputError(const std::string& what)
      : Error(ErrorCode::kInput, what) {}
};

// A configured enumeration limit would be exceeded.
class LimitError : public Error {
 public:
  explicit LimitError(const std::string& what)
      : Error(ErrorCode::kResourceLimit, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(ErrorCode::kNumeric, what) {}
};

}  // namespace crowdplan

#endif  // CROWDPLAN_ERROR_H_
