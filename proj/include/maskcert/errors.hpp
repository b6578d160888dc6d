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

#pragma once

#include <stdexcept>
#include <string>

namespace maskcert {

enum class ErrorCode {
  kEmptyInput,
  kReservedToken,
  kInvalidMaskCount,
  kMaskLengthMismatch,
  kEnumerationTooLarge,
  kInvalidDeltaQuery,
  kInvalidArgument,
  kTemplateError,
  kBackendUnavailable,
  kBackendProtocolError,
  kCacheError,
  kDatasetError,
  kConfigError,
  kIoError,
};

const char* ErrorCodeName(ErrorCode code);

// Base of every error raised by the library. The code lets callers branch
// without a catch clause per type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define MASKCERT_DEFINE_ERROR(Name, Code)              \
  class Name : public Error {                          \
   public:                                             \
    explicit Name(const std::string& message)          \
        : Error(ErrorCode::Code, message) {}           \
  }

MASKCERT_DEFINE_ERROR(EmptyInput, kEmptyInput);
MASKCERT_DEFINE_ERROR(ReservedToken, kReservedToken);
MASKCERT_DEFINE_ERROR(InvalidMaskCount, kInvalidMaskCount);
MASKCERT_DEFINE_ERROR(MaskLengthMismatch, kMaskLengthMismatch);
MASKCERT_DEFINE_ERROR(EnumerationTooLarge, kEnumerationTooLarge);
MASKCERT_DEFINE_ERROR(InvalidDeltaQuery, kInvalidDeltaQuery);
MASKCERT_DEFINE_ERROR(InvalidArgument, kInvalidArgument);
MASKCERT_DEFINE_ERROR(TemplateError, kTemplateError);
MASKCERT_DEFINE_ERROR(BackendUnavailable, kBackendUnavailable);
MASKCERT_DEFINE_ERROR(BackendProtocolError, kBackendProtocolError);
MASKCERT_DEFINE_ERROR(CacheError, kCacheError);
MASKCERT_DEFINE_ERROR(DatasetError, kDatasetError);
MASKCERT_DEFINE_ERROR(ConfigError, kConfigError);
MASKCERT_DEFINE_ERROR(IoError, kIoError);

#undef MASKCERT_DEFINE_ERROR

}  // namespace maskcert
