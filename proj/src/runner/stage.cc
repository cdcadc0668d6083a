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

#include "tabadv/runner/stage.h"


#include "absl/strings/cord.h"
#include "absl/strings/str_cat.h"

namespace tabadv {
namespace {

constexpr absl::string_view kStagePayload = "tabadv/stage";
constexpr Stage kAllStages[] = {Stage::kConfig,   Stage::kData,  Stage::kTrain,
                                Stage::kAttack,   Stage::kEvaluate,
                                Stage::kStats,    Stage::kEmit};

}  // namespace

absl::string_view StageName(Stage s) {
  switch (s) {
    case Stage::kConfig:
      return "config";
    case Stage::kData:
      return "data";
    case Stage::kTrain:
      return "train";
    case Stage::kAttack:
      return "attack";
    case Stage::kEvaluate:
      return "evaluate";
    case Stage::kStats:
      return "stats";
    case Stage::kEmit:
      return "emit";
  }
  return "unknown";
}

absl::StatusOr<Stage> ParseStage(absl::string_view name) {
  for (const Stage s : kAllStages) {
    if (StageName(s) == name) return s;
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown stage '", name, "'"));
}

absl::Status TagStage(Stage s, const absl::Status& status) {
  if (status.ok() || status.GetPayload(kStagePayload).has_value()) return status;
  absl::Status tagged(status.code(),
                      absl::StrCat(StageName(s), ": ", status.message()));
  tagged.SetPayload(kStagePayload, absl::Cord(StageName(s)));
  return tagged;
}

int ExitCodeFor(const absl::Status& status) {
  if (status.ok()) return kExitOk;
  const auto stage = status.GetPayload(kStagePayload);
  if (stage && *stage == StageName(Stage::kConfig)) return kExitConfigError;
  if (stage && *stage == StageName(Stage::kData)) return kExitDataError;
  return kExitRuntimeFailure;
}

}  // namespace tabadv
