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

#ifndef TABADV_RUNNER_CONFIG_H_
#define TABADV_RUNNER_CONFIG_H_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "json.hpp"
#include "tabadv/attacks/query_attacks.h"
#include "tabadv/attacks/transfer.h"
#include "tabadv/common/mode.h"
#include "tabadv/csad/detectors.h"
#include "tabadv/learners/surrogate.h"
#include "tabadv/learners/tree.h"
#include "tabadv/schema/schema.h"

namespace tabadv {

struct ModelSpec {
  std::string name;
  EnsembleKind kind = EnsembleKind::kGradientBoosting;
  BoostingParams boosting;
  ForestParams forest;
};

enum class AttackKind { kBoundary, kHopSkipJump, kTransfer };
enum class SelectorKind { kRandom, kImportance };

absl::string_view AttackKindName(AttackKind k);

struct AttackSpec {
  std::string name;
  AttackKind kind = AttackKind::kBoundary;
  BoundaryConfig boundary;
  HsjConfig hsj;
  TransferConfig transfer;
  SelectorKind selector = SelectorKind::kRandom;
  int k = 2;
  int n_corr = 1;
  // Name of an importance source; importance selector only.
  std::string source;

  bool is_query() const { return kind != AttackKind::kTransfer; }
};

struct ExperimentConfig {
  // Resolved against the config file's directory.
  std::string data_csv;
  std::string schema_path;
  uint64_t seed = 0;

  double train_fraction = 0.7;
  // Share of the (oversampled) training rows handed to the attacker.
  double attacker_fraction = 0.5;
  // Absolute Pearson threshold for dropping features; 0 disables.
  double drop_correlated_threshold = 0.0;
  bool oversample_minority = true;

  std::vector<std::string> dependents;
  // Optional [lo, hi] benign quantiles narrowing the clip range of every
  // directly perturbable feature; fitted on the attacker's rows.
  std::optional<std::pair<double, double>> clamp_quantiles;
  BoostingParams dependency_model;

  std::vector<ModelSpec> models;
  std::vector<ModelSpec> importance_sources;
  SurrogateArch surrogate_arch;
  TrainConfig surrogate_train;

  std::vector<AttackSpec> attacks;
  int per_class_count = 50;
  bool filter_by_surrogate = true;

  std::vector<DetectorKind> detector_kinds = {DetectorKind::kIsolationForest,
                                              DetectorKind::kAutoencoder};
  std::vector<DetectionMode> detector_modes = {DetectionMode::kCsad,
                                               DetectionMode::kStandard};
  BankConfig bank;
  std::vector<DetectionMode> shap_modes = {DetectionMode::kCsad,
                                           DetectionMode::kStandard};
  bool stats = true;
  // McNemar value used for the S/M/L category: "g" or "doubled_g".
  std::string mcnemar_effect = "g";
  double effort_alpha_q = 1.0;

  std::string output_dir = "out";
};

// Parses the key tree. `base_dir` anchors relative data paths. Unknown keys
// are rejected.
absl::StatusOr<ExperimentConfig> ParseConfig(const nlohmann::json& doc,
                                             const std::string& base_dir);
absl::StatusOr<ExperimentConfig> LoadConfig(const std::string& path);

// Cross-checks the config against the dataset schema: dependents exist,
// names are unique, every importance attack names a configured source.
absl::Status ValidateConfig(const ExperimentConfig& cfg, const Schema& schema);

}  // namespace tabadv

#endif  // TABADV_RUNNER_CONFIG_H_
