/*
 * Copyright 2026 The TabAdv Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef TABADV_COMMON_STATUS_MACROS_H_
#define TABADV_COMMON_STATUS_MACROS_H_

#include "absl/status/status.h"
#include "absl/status/statusor.h"

#define TABADV_CONCAT_IMPL(a, b) a##b
#define TABADV_CONCAT(a, b) TABADV_CONCAT_IMPL(a, b)

#define RETURN_IF_ERROR(expr)                \
  do {                                       \
    const absl::Status _status = (expr);     \
    if (!_status.ok()) return _status;       \
  } while (0)

#define ASSIGN_OR_RETURN_IMPL(statusor, lhs, rexpr) \
  auto statusor = (rexpr);                          \
  if (!statusor.ok()) return statusor.status();     \
  lhs = std::move(statusor).value()

// ASSIGN_OR_RETURN(auto x, Foo()) unpacks a StatusOr or propagates its error.
#define ASSIGN_OR_RETURN(lhs, rexpr) \
  ASSIGN_OR_RETURN_IMPL(TABADV_CONCAT(_statusor_, __LINE__), lhs, rexpr)

#endif  // TABADV_COMMON_STATUS_MACROS_H_
