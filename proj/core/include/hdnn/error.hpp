// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef HDNN_ERROR_HPP
#define HDNN_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace hdnn {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  ConvergenceFailure,
  AllZeroMatrix,
  RankDeficient,
  SingularGram,
  InvalidPreset,
  OddStreams,
  DivergenceDetected,
  UntrainedModel,
  IllConditioned,
  InvalidConfig,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so
// callers (and the CLI exit-code mapping) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::AllZeroMatrix: return "AllZeroMatrix";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::SingularGram: return "SingularGram";
    case ErrorCode::InvalidPreset: return "InvalidPreset";
    case ErrorCode::OddStreams: return "OddStreams";
    case ErrorCode::DivergenceDetected: return "DivergenceDetected";
    case ErrorCode::UntrainedModel: return "UntrainedModel";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace hdnn

#endif  // HDNN_ERROR_HPP
