// Copyright 2026 The FLaPS Simulator Authors
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

#ifndef FLAPS_STATUS_MACROS_H_
#define FLAPS_STATUS_MACROS_H_

#include <utility>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

#define FLAPS_STATUS_CONCAT_INNER_(x, y) x##y
#define FLAPS_STATUS_CONCAT_(x, y) FLAPS_STATUS_CONCAT_INNER_(x, y)

#define FLAPS_RETURN_IF_ERROR(expr)                \
  do {                                             \
    const absl::Status _flaps_status = (expr);     \
    if (!_flaps_status.ok()) return _flaps_status; \
  } while (0)

#define FLAPS_ASSIGN_OR_RETURN_IMPL_(statusor, lhs, rexpr) \
  auto statusor = (rexpr);                                 \
  if (!statusor.ok()) return statusor.status();            \
  lhs = std::move(statusor).value()

// Evaluates an expression returning absl::StatusOr<T>; on success assigns the
// value to `lhs`, otherwise returns the error from the enclosing function.
#define FLAPS_ASSIGN_OR_RETURN(lhs, rexpr) \
  FLAPS_ASSIGN_OR_RETURN_IMPL_(            \
      FLAPS_STATUS_CONCAT_(_flaps_statusor_, __LINE__), lhs, rexpr)

#endif  // FLAPS_STATUS_MACROS_H_
