// Copyright 2026 The maskcert Authors.
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

#include "maskcert/errors.hpp"

namespace maskcert {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyInput:
      return "EmptyInput";
    case ErrorCode::kReservedToken:
      return "ReservedToken";
    case ErrorCode::kInvalidMaskCount:
      return "InvalidMaskCount";
    case ErrorCode::kMaskLengthMismatch:
      return "MaskLengthMismatch";
    case ErrorCode::kEnumerationTooLarge:
      return "EnumerationTooLarge";
    case ErrorCode::kInvalidDeltaQuery:
      return "InvalidDeltaQuery";
    case ErrorCode::kInvalidArgument:
      return "InvalidArgument";
    case ErrorCode::kTemplateError:
      return "TemplateError";
    case ErrorCode::kBackendUnavailable:
      return "BackendUnavailable";
    case ErrorCode::kBackendProtocolError:
      return "BackendProtocolError";
    case ErrorCode::kCacheError:
      return "CacheError";
    case ErrorCode::kDatasetError:
      return "DatasetError";
    case ErrorCode::kConfigError:
      return "ConfigError";
    case ErrorCode::kIoError:
      return "IoError";
  }
  return "Unknown";
}

}  // namespace maskcert
