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

#ifndef TABADV_RUNNER_REPORT_H_
#define TABADV_RUNNER_REPORT_H_

#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "json.hpp"

namespace tabadv {

absl::Status WriteTextFile(const std::string& path, const std::string& content);
absl::StatusOr<nlohmann::json> ReadJsonFile(const std::string& path);

// report.json, pretty-printed with a trailing newline.
absl::Status EmitReport(const nlohmann::json& report, const std::string& dir);

// Tidy CSVs: perturbation.csv (one row per successful adversarial per norm),
// detection.csv (per successful adversarial, detector and mode),
// shap_anomaly.csv (per successful adversarial and mode) and
// detection_rates.csv (one row per cell, detector and mode).
absl::Status EmitPlotData(const nlohmann::json& report, const std::string& dir);

// Structural check: required blocks, one cell per configured (attack, model)
// pair, consistent per-sample arrays, and the query budget law.
absl::Status ValidateReport(const nlohmann::json& report);

// Copy of the report without run-time measurements; two runs with the same
// seed agree on this part byte for byte.
nlohmann::json WithoutTiming(const nlohmann::json& report);

}  // namespace tabadv

#endif  // TABADV_RUNNER_REPORT_H_
