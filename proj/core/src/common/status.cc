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

#include "vfi/common/status.h"

#include <array>
#include <string>

#include "absl/strings/cord.h"

namespace vfi {
namespace {

constexpr char kKindPayloadUrl[] = "type.vfi/error-kind";

struct KindInfo {
  ErrorKind kind;
  absl::string_view name;
  absl::StatusCode code;
};

constexpr std::array<KindInfo, 18> kKinds = {{
    {ErrorKind::kUnknown, "unknown", absl::StatusCode::kUnknown},
    {ErrorKind::kStructural, "structural", absl::StatusCode::kInvalidArgument},
    {ErrorKind::kLevel, "level", absl::StatusCode::kOutOfRange},
    {ErrorKind::kCapacity, "capacity", absl::StatusCode::kResourceExhausted},
    {ErrorKind::kAlignment, "alignment",
     absl::StatusCode::kFailedPrecondition},
    {ErrorKind::kDepthExhausted, "depth_exhausted",
     absl::StatusCode::kOutOfRange},
    {ErrorKind::kKeyNotFound, "key_not_found", absl::StatusCode::kNotFound},
    {ErrorKind::kProtocol, "protocol", absl::StatusCode::kFailedPrecondition},
    {ErrorKind::kIncompleteProtocol, "incomplete_protocol",
     absl::StatusCode::kFailedPrecondition},
    {ErrorKind::kShape, "shape", absl::StatusCode::kInvalidArgument},
    {ErrorKind::kLoad, "load", absl::StatusCode::kInvalidArgument},
    {ErrorKind::kDepthOverflow, "depth_overflow",
     absl::StatusCode::kOutOfRange},
    {ErrorKind::kFraming, "framing", absl::StatusCode::kDataLoss},
    {ErrorKind::kTimeout, "timeout", absl::StatusCode::kDeadlineExceeded},
    {ErrorKind::kConfig, "config", absl::StatusCode::kInvalidArgument},
    {ErrorKind::kUnknownRecord, "unknown_record", absl::StatusCode::kNotFound},
    {ErrorKind::kParamsMismatch, "params_mismatch",
     absl::StatusCode::kFailedPrecondition},
    {ErrorKind::kIo, "io", absl::StatusCode::kUnavailable},
}};

const KindInfo& Info(ErrorKind kind) {
  for (const auto& info : kKinds) {
    if (info.kind == kind) return info;
  }
  return kKinds[0];
}

}  // namespace

absl::string_view ErrorKindName(ErrorKind kind) { return Info(kind).name; }

absl::Status MakeError(ErrorKind kind, absl::string_view message) {
  const KindInfo& info = Info(kind);
  absl::Status status(info.code, message);
  status.SetPayload(kKindPayloadUrl, absl::Cord(info.name));
  return status;
}

ErrorKind GetErrorKind(const absl::Status& status) {
  if (status.ok()) return ErrorKind::kUnknown;
  auto payload = status.GetPayload(kKindPayloadUrl);
  if (!payload.has_value()) return ErrorKind::kUnknown;
  std::string name(*payload);
  for (const auto& info : kKinds) {
    if (info.name == name) return info.kind;
  }
  return ErrorKind::kUnknown;
}

}  // namespace vfi
