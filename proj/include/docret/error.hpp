// Copyright 2026-present the docret project
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
#include <string_view>

namespace docret {

enum class ErrorCode {
  kDuplicateId,
  kParseError,
  kGoldNotFound,
  kDimMismatch,
  kUnknownPage,
  kIncompatibleStore,
  kChannelNotFound,
  kEmptySet,
  kEmptyList,
  kInvalidParams,
  kQuerySetMismatch,
  kPayloadMissing,
  kNoScoredResults,
  kServiceError,
  kRunAborted,
  kIo,
};

std::string_view to_string(ErrorCode code);

/// Every failure the engine reports carries one of the codes above so the
/// CLI can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Usage (2), data (3) or service (4) class of an error code.
int exit_status(ErrorCode code);

}  // namespace docret
