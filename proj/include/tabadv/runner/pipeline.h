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

#ifndef TABADV_RUNNER_PIPELINE_H_
#define TABADV_RUNNER_PIPELINE_H_

#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "tabadv/learners/archive.h"
#include "tabadv/metrics/metrics.h"
#include "tabadv/runner/attack_set.h"
#include "tabadv/runner/config.h"
#include "tabadv/runner/stage.h"

namespace tabadv {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr char kToolVersion[] = "0.1.0";

struct PreparedData {
  Schema schema;
  Dataset test;
  Dataset target_train;
  Dataset attacker_train;
  int total_rows = 0;
  int oversampled_rows = 0;
  std::vector<std::string> dropped_features;
};

// Loads and preprocesses the data: correlated-feature dropping, train/test
// split, minority oversampling of the training part, and the split of the
// training rows between the target owner and the attacker.
absl::StatusOr<PreparedData> PrepareData(const ExperimentConfig& cfg);

struct TrainedModels {
  ModelArchive archive;
  nlohmann::json summary;  // accuracies and training reports
  double surrogate_seconds = 0.0;
};

absl::StatusOr<TrainedModels> TrainModels(const ExperimentConfig& cfg,
                                          const PreparedData& data);

enum class RunNote { kNone, kInitFailed, kInvalidStart };

struct CellLedger {
  std::string attack;
  std::string model;
  AttackKind kind = AttackKind::kBoundary;
  std::vector<size_t> sample_ids;  // test-set row indices
  std::vector<int> labels;
  std::vector<int> iterations;
  std::vector<RunNote> notes;
  // Accepted-candidate distances of query attacks; empty for transfer runs.
  std::vector<std::vector<double>> l2_traces;
  RunLedger entries;
};

struct AttackResults {
  std::vector<CellLedger> cells;
  nlohmann::json attack_sets;  // per model: retention and per-class counts
};

absl::StatusOr<AttackResults> RunAttacks(const ExperimentConfig& cfg,
                                         const PreparedData& data,
                                         const ModelArchive& archive, int jobs);

nlohmann::json LedgersToJson(const AttackResults& r);
absl::StatusOr<AttackResults> LedgersFromJson(const nlohmann::json& j);

// Builds the report (without the stats block) from attack ledgers.
absl::StatusOr<nlohmann::json> Evaluate(const ExperimentConfig& cfg,
                                        const PreparedData& data,
                                        const TrainedModels& models,
                                        const AttackResults& attacks, int jobs);

// Statistical comparisons computed from the per-sample arrays stored in a
// report's cells.
absl::StatusOr<nlohmann::json> ComputeStats(const nlohmann::json& report);

struct RunOptions {
  int jobs = 1;
  // Last stage to execute; artifacts of completed stages are written.
  Stage stop_after = Stage::kEmit;
};

// The full pipeline. Writes models.json, ledgers.json, report.json and plot
// CSVs into cfg.output_dir as the stages complete. Errors carry the failing
// stage (see TagStage).
absl::StatusOr<nlohmann::json> RunExperiment(const ExperimentConfig& cfg,
                                             const RunOptions& opts);

// Single-stage entry points over artifacts in cfg.output_dir.
absl::Status RunAttackStage(const ExperimentConfig& cfg, int jobs);
absl::StatusOr<nlohmann::json> RunEvaluateStage(const ExperimentConfig& cfg,
                                                int jobs);
absl::StatusOr<nlohmann::json> RunStatsStage(const std::string& dir);

}  // namespace tabadv

#endif  // TABADV_RUNNER_PIPELINE_H_
