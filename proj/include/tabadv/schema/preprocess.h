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

#ifndef TABADV_SCHEMA_PREPROCESS_H_
#define TABADV_SCHEMA_PREPROCESS_H_

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "tabadv/schema/schema.h"

namespace tabadv {

// Sample Pearson correlation, clamped to [-1, 1].
absl::StatusOr<double> Pearson(std::span<const double> x,
                               std::span<const double> y);

// Pearson, or 0 when either column is constant. Used where a missing edge is
// the right answer for degenerate columns.
double PearsonOrZero(std::span<const double> x, std::span<const double> y);

// |r| matrix over all feature columns (diagonal 1).
std::vector<std::vector<double>> AbsCorrelationMatrix(const Dataset& ds);

struct DropCorrelatedResult {
  Dataset dataset;
  std::vector<std::string> dropped;
  uint64_t seed = 0;
};

// Groups features into connected components of the |r| > threshold graph and
// keeps one uniformly chosen member of each component.
absl::StatusOr<DropCorrelatedResult> DropCorrelated(const Dataset& ds,
                                                    double threshold,
                                                    uint64_t seed);

absl::StatusOr<std::pair<Dataset, Dataset>> TrainTestSplit(
    const Dataset& ds, double train_fraction, uint64_t seed);

// Appends whole-row duplicates of the minority class, cycling through its rows
// in order, until its count equals the largest class count.
absl::StatusOr<Dataset> OversampleMinority(const Dataset& ds,
                                           int minority_class);

}  // namespace tabadv

#endif  // TABADV_SCHEMA_PREPROCESS_H_
