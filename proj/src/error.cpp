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

#include "docret/error.hpp"

namespace docret {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kGoldNotFound: return "GoldNotFound";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kUnknownPage: return "UnknownPage";
    case ErrorCode::kIncompatibleStore: return "IncompatibleStore";
    case ErrorCode::kChannelNotFound: return "ChannelNotFound";
    case ErrorCode::kEmptySet: return "EmptySet";
    case ErrorCode::kEmptyList: return "EmptyList";
    case ErrorCode::kInvalidParams: return "InvalidParams";
    case ErrorCode::kQuerySetMismatch: return "QuerySetMismatch";
    case ErrorCode::kPayloadMissing: return "PayloadMissing";
    case ErrorCode::kNoScoredResults: return "NoScoredResults";
    case ErrorCode::kServiceError: return "ServiceError";
    case ErrorCode::kRunAborted: return "RunAborted";
    case ErrorCode::kIo: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

int exit_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidParams:
      return 2;
    case ErrorCode::kServiceError:
    case ErrorCode::kRunAborted:
      return 4;
    default:
      return 3;
  }
}

}  // namespace docret
