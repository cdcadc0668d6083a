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


#include "tabadv/common/mode.h"

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace tabadv {

absl::string_view DetectionModeName(DetectionMode mode) {
  return mode == DetectionMode::kCsad ? "csad" : "standard";
}

absl::StatusOr<DetectionMode> ParseDetectionMode(absl::string_view name) {
  if (name == "csad") return DetectionMode::kCsad;
  if (name == "standard") return DetectionMode::kStandard;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown detection mode '", name, "'"));
}

}  // namespace tabadv
