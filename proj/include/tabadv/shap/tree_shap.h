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


#ifndef TABADV_SHAP_TREE_SHAP_H_
#define TABADV_SHAP_TREE_SHAP_H_

#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "tabadv/common/mode.h"
#include "tabadv/common/vec.h"
#include "tabadv/learners/tree.h"

namespace tabadv {

struct ShapExplanation {
  Vec attributions;
  // Expected margin under the node-weight background.
  double base_value = 0.0;
};

// Path-dependent Tree-SHAP on the ensemble's margin scale.
absl::StatusOr<ShapExplanation> TreeShap(const TreeEnsemble& e,
                                         std::span<const double> x);

// Exact Shapley values by subset enumeration, using the same node-weight
// conditional expectations. At most kMaxBruteForceFeatures features.
inline constexpr int kMaxBruteForceFeatures = 12;
absl::StatusOr<ShapExplanation> ShapBruteForce(const TreeEnsemble& e,
                                               std::span<const double> x);

// Mean |attribution| per feature over `rows`.
absl::StatusOr<Vec> MeanAbsShap(const TreeEnsemble& e,
                                const std::vector<Vec>& rows);

// Benign attribution ranges. csad: one row of [lo, hi] per class; standard:
// a single pooled row.
struct ShapRangeTable {
  DetectionMode mode = DetectionMode::kCsad;
  std::vector<Vec> lo;
  std::vector<Vec> hi;
};

absl::StatusOr<ShapRangeTable> BuildRangeTable(
    const std::vector<Vec>& attributions, std::span<const int> classes,
    int n_classes, DetectionMode mode);

// Explains `rows` with `e` and groups them by `classes`.
absl::StatusOr<ShapRangeTable> BuildRangeTable(const TreeEnsemble& e,
                                               const std::vector<Vec>& rows,
                                               std::span<const int> classes,
                                               int n_classes,
                                               DetectionMode mode);

struct ImportanceAnomalyReport {
  // Share of samples with at least one attribution outside its range.
  double rate = 0.0;
  // Mean number of out-of-range features per sample.
  double avg_count = 0.0;
};

// Number of attributions strictly outside the closed range of `cls`.
int CountOutOfRange(const ShapRangeTable& table, std::span<const double> phi,
                    int cls);

absl::StatusOr<ImportanceAnomalyReport> ImportanceAnomaly(
    const ShapRangeTable& table, const std::vector<Vec>& attributions,
    std::span<const int> predicted_classes);

// Long-format CSV: sample_id,feature,attribution.
std::string ShapCsv(const std::vector<Vec>& attributions,
                    const std::vector<std::string>& feature_names);

}  // namespace tabadv

#endif  // TABADV_SHAP_TREE_SHAP_H_
