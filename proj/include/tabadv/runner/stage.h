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

#ifndef TABADV_RUNNER_STAGE_H_
#define TABADV_RUNNER_STAGE_H_

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"

namespace tabadv {

enum class Stage { kConfig, kData, kTrain, kAttack, kEvaluate, kStats, kEmit };

absl::string_view StageName(Stage s);
absl::StatusOr<Stage> ParseStage(absl::string_view name);

// Prefixes the message with the stage name and records the stage so the CLI
// can pick an exit code. OK passes through.
absl::Status TagStage(Stage s, const absl::Status& status);

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitDataError = 3;
inline constexpr int kExitRuntimeFailure = 4;

int ExitCodeFor(const absl::Status& status);

}  // namespace tabadv

#endif  // TABADV_RUNNER_STAGE_H_
