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

#ifndef TABADV_LEARNERS_ARCHIVE_H_
#define TABADV_LEARNERS_ARCHIVE_H_

#include <map>
#include <optional>
#include <string>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "json.hpp"
#include "tabadv/coherence/constraints.h"
#include "tabadv/learners/surrogate.h"
#include "tabadv/learners/tree.h"
#include "tabadv/schema/schema.h"

namespace tabadv {

inline constexpr int kArchiveVersion = 1;

nlohmann::json TreeEnsembleToJson(const TreeEnsemble& e);
absl::StatusOr<TreeEnsemble> TreeEnsembleFromJson(const nlohmann::json& j);

nlohmann::json MlpToJson(const Mlp& m);
absl::StatusOr<Mlp> MlpFromJson(const nlohmann::json& j);

nlohmann::json SurrogateToJson(const SurrogateModel& m);
absl::StatusOr<SurrogateModel> SurrogateFromJson(const nlohmann::json& j);

nlohmann::json RegistryToJson(const DependencyRegistry& r);
absl::StatusOr<DependencyRegistry> RegistryFromJson(const nlohmann::json& j);

// Everything the attack stage needs, keyed by configured names.
struct ModelArchive {
  Schema schema;
  std::map<std::string, TreeEnsemble> targets;
  std::optional<SurrogateModel> surrogate;
  DependencyRegistry registry;
  std::map<std::string, TreeEnsemble> importance_sources;
};

nlohmann::json ArchiveToJson(const ModelArchive& a);
absl::StatusOr<ModelArchive> ArchiveFromJson(const nlohmann::json& j);
absl::Status SaveArchive(const std::string& path, const ModelArchive& a);
absl::StatusOr<ModelArchive> LoadArchive(const std::string& path);

}  // namespace tabadv

#endif  // TABADV_LEARNERS_ARCHIVE_H_
