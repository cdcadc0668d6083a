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


#ifndef TABADV_COMMON_MODE_H_
#define TABADV_COMMON_MODE_H_

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"

namespace tabadv {

// Class-specific (one model or table per class) versus pooled.
enum class DetectionMode { kCsad, kStandard };

absl::string_view DetectionModeName(DetectionMode mode);
absl::StatusOr<DetectionMode> ParseDetectionMode(absl::string_view name);

}  // namespace tabadv

#endif  // TABADV_COMMON_MODE_H_
