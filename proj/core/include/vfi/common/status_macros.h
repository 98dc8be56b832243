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

#ifndef VFI_COMMON_STATUS_MACROS_H_
#define VFI_COMMON_STATUS_MACROS_H_

#include <utility>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

#define VFI_STATUS_CONCAT_INNER_(a, b) a##b
#define VFI_STATUS_CONCAT_(a, b) VFI_STATUS_CONCAT_INNER_(a, b)

#define VFI_RETURN_IF_ERROR(expr)              \
  do {                                         \
    ::absl::Status vfi_status_ = (expr);       \
    if (!vfi_status_.ok()) return vfi_status_; \
  } while (0)

#define VFI_ASSIGN_OR_RETURN_IMPL_(tmp, lhs, rexpr) \
  auto tmp = (rexpr);                               \
  if (!tmp.ok()) return tmp.status();               \
  lhs = std::move(tmp).value()

#define VFI_ASSIGN_OR_RETURN(lhs, rexpr) \
  VFI_ASSIGN_OR_RETURN_IMPL_(            \
      VFI_STATUS_CONCAT_(vfi_statusor_, __LINE__), lhs, rexpr)

#endif  // VFI_COMMON_STATUS_MACROS_H_
