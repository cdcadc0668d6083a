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

#ifndef TABADV_RUNNER_ATTACK_SET_H_
#define TABADV_RUNNER_ATTACK_SET_H_

#include <cstdint>
#include <vector>

#include "absl/status/statusor.h"
#include "tabadv/learners/classifier.h"
#include "tabadv/schema/schema.h"

namespace tabadv {

struct AttackSet {
  Dataset data;
  // Row index of each attack-set row in the source test set.
  std::vector<size_t> source_rows;
  // Share of test rows that passed the correctness filter.
  double retention_rate = 0.0;
  std::vector<int> eligible_per_class;
  std::vector<int> drawn_per_class;
  // Per class, how many rows were missing to reach per_class_count.
  std::vector<int> shortfall;
};

// Keeps test rows classified correctly by the target (and the surrogate when
// given), then draws up to per_class_count rows of each class without
// replacement. Rows keep their test-set order.
absl::StatusOr<AttackSet> BuildAttackSet(const Dataset& test,
                                         const Classifier& target,
                                         const Classifier* surrogate,
                                         int per_class_count, uint64_t seed);

}  // namespace tabadv

#endif  // TABADV_RUNNER_ATTACK_SET_H_
