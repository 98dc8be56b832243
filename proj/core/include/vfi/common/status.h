// Copyright 2026 The VFI Authors
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

#ifndef VFI_COMMON_STATUS_H_
#define VFI_COMMON_STATUS_H_

#include <string>
#include "absl/strings/string_view.h"

#include "absl/status/status.h"

namespace vfi {

// Typed error categories. Each category maps onto a canonical absl code and
// is also attached to the status as a payload so callers can distinguish,
// e.g., a depth-exhausted multiply from a plain level mismatch.
enum class ErrorKind {
  kUnknown = 0,
  kStructural,
  kLevel,
  kCapacity,
  kAlignment,
  kDepthExhausted,
  kKeyNotFound,
  kProtocol,
  kIncompleteProtocol,
  kShape,
  kLoad,
  kDepthOverflow,
  kFraming,
  kTimeout,
  kConfig,
  kUnknownRecord,
  kParamsMismatch,
  kIo,
};

absl::string_view ErrorKindName(ErrorKind kind);

absl::Status MakeError(ErrorKind kind, absl::string_view message);

// Returns kUnknown for OK statuses and for statuses not produced by
// MakeError.
ErrorKind GetErrorKind(const absl::Status& status);

inline absl::Status StructuralError(absl::string_view m) {
  return MakeError(ErrorKind::kStructural, m);
}
inline absl::Status LevelError(absl::string_view m) {
  return MakeError(ErrorKind::kLevel, m);
}
inline absl::Status CapacityError(absl::string_view m) {
  return MakeError(ErrorKind::kCapacity, m);
}
inline absl::Status AlignmentError(absl::string_view m) {
  return MakeError(ErrorKind::kAlignment, m);
}
inline absl::Status DepthExhaustedError(absl::string_view m) {
  return MakeError(ErrorKind::kDepthExhausted, m);
}
inline absl::Status KeyNotFoundError(absl::string_view m) {
  return MakeError(ErrorKind::kKeyNotFound, m);
}
inline absl::Status ProtocolError(absl::string_view m) {
  return MakeError(ErrorKind::kProtocol, m);
}
inline absl::Status IncompleteProtocolError(absl::string_view m) {
  return MakeError(ErrorKind::kIncompleteProtocol, m);
}
inline absl::Status ShapeError(absl::string_view m) {
  return MakeError(ErrorKind::kShape, m);
}
inline absl::Status LoadError(absl::string_view m) {
  return MakeError(ErrorKind::kLoad, m);
}
inline absl::Status DepthOverflowError(absl::string_view m) {
  return MakeError(ErrorKind::kDepthOverflow, m);
}
inline absl::Status FramingError(absl::string_view m) {
  return MakeError(ErrorKind::kFraming, m);
}
inline absl::Status TimeoutError(absl::string_view m) {
  return MakeError(ErrorKind::kTimeout, m);
}
inline absl::Status ConfigError(absl::string_view m) {
  return MakeError(ErrorKind::kConfig, m);
}
inline absl::Status UnknownRecordError(absl::string_view m) {
  return MakeError(ErrorKind::kUnknownRecord, m);
}
inline absl::Status ParamsMismatchError(absl::string_view m) {
  return MakeError(ErrorKind::kParamsMismatch, m);
}
inline absl::Status IoError(absl::string_view m) {
  return MakeError(ErrorKind::kIo, m);
}

}  // namespace vfi

#endif  // VFI_COMMON_STATUS_H_
