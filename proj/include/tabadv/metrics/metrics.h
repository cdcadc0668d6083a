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

#ifndef TABADV_METRICS_METRICS_H_
#define TABADV_METRICS_METRICS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "tabadv/common/vec.h"
#include "tabadv/schema/schema.h"

namespace tabadv {

inline constexpr double kL0Tolerance = 1e-12;

// Coordinates of x and x_adv differing by more than kL0Tolerance. When
// features is non-empty both vectors are first rounded to their kinds.
absl::StatusOr<int> L0(std::span<const double> x, std::span<const double> x_adv,
                       std::span<const FeatureSpec> features = {});
absl::StatusOr<double> L2(std::span<const double> x,
                          std::span<const double> x_adv);

struct LedgerEntry {
  Vec x;
  Vec x_adv;
  bool surrogate_success = false;
  bool target_success = false;
  int64_t queries = 0;
  double wall_seconds = 0.0;
};

using RunLedger = std::vector<LedgerEntry>;

enum class AttackFamily { kQuery, kTransfer };

struct SuccessRates {
  int attack_set = 0;
  // Target flips over the attack set.
  double sr = 0.0;
  // Transfer attacks only.
  std::optional<double> surrogate_sr;
  std::optional<double> transfer_sr;  // absent when the surrogate never flips
  std::optional<double> overall_sr;
};

absl::StatusOr<SuccessRates> ComputeSuccessRates(const RunLedger& ledger,
                                                 AttackFamily family);

struct QueryStats {
  double mean = 0.0;
  double median = 0.0;
  int64_t max = 0;
};

absl::StatusOr<QueryStats> ComputeQueryStats(const RunLedger& ledger);

// Mean L0 and L2 over target-successful entries. count == 0 leaves both 0.
struct PerturbationSummary {
  int count = 0;
  double mean_l0 = 0.0;
  double mean_l2 = 0.0;
};

absl::StatusOr<PerturbationSummary> SummarizePerturbations(
    const RunLedger& ledger, std::span<const FeatureSpec> features = {});

struct EffortModel {
  double queries = 0.0;  // n for query attacks, m for transfer attacks
  double query_time = 0.0;  // t
  double alpha_q = 0.0;
  double beta = 0.0;
  double surrogate_train_time = 0.0;
};

// n t^2 alpha beta, evaluated as written.
double TimeQueryAttack(const EffortModel& e);
// m t^2 alpha beta + T_surrogate + t.
double TimeTransferAttack(const EffortModel& e);

}  // namespace tabadv

#endif  // TABADV_METRICS_METRICS_H_
