/*
 * Copyright 2026 The rdfl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef RDFL_ERROR_HPP_
#define RDFL_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace rdfl {

// Numeric values are mirrored by rdfl_status in include/rdfl/rdfl.h.
enum class ErrorCode {
  kInvalidArgument = 1,
  kDegenerateMarket = 2,
  kInvalidQuality = 3,
  kInsufficientParticipants = 4,
  kNoViableMarket = 5,
  kTrainingDivergence = 6,
  kConfig = 7,
  kIo = 8,
};

const char* ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void Require(bool condition, ErrorCode code, const char* message) {
  if (!condition) throw Error(code, message);
}

}  // namespace rdfl

#endif  // RDFL_ERROR_HPP_
