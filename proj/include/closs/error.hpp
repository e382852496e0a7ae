// Copyright 2026 The closs Authors. All Rights Reserved.
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

#pragma once

#include <stdexcept>
#include <string>

namespace closs {

enum class ErrorCode {
  kIo,
  kUnsupportedFormat,
  kWrongSampleRate,
  kWrongChannelCount,
  kSilentSignal,
  kShapeMismatch,
  kInvalidArgument,
  kPrecondition,
  kNumerical,
};

inline const char* ToString(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "io";
    case ErrorCode::kUnsupportedFormat: return "unsupported-format";
    case ErrorCode::kWrongSampleRate: return "wrong-sample-rate";
    case ErrorCode::kWrongChannelCount: return "wrong-channel-count";
    case ErrorCode::kSilentSignal: return "silent-signal";
    case ErrorCode::kShapeMismatch: return "shape-mismatch";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kPrecondition: return "precondition";
    case ErrorCode::kNumerical: return "numerical";
  }
  return "unknown";
}

// Every failure in the library surfaces as this exception; callers branch on
// code() rather than on the message text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void Require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) throw Error(code, what);
}

}  // namespace closs
