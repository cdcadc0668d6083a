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

#include "tabadv/runner/attack_set.h"

#include <algorithm>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "tabadv/common/random.h"

namespace tabadv {

absl::StatusOr<AttackSet> BuildAttackSet(const Dataset& test,
                                         const Classifier& target,
                                         const Classifier* surrogate,
                                         int per_class_count, uint64_t seed) {
  if (test.rows.empty()) return absl::InvalidArgumentError("empty test set");
  if (per_class_count < 1) {
    return absl::InvalidArgumentError("per_class_count must be >= 1");
  }
  const int k = test.schema.n_classes;
  std::vector<std::vector<size_t>> eligible(k);
  for (size_t i = 0; i < test.rows.size(); ++i) {
    const int y = test.labels[i];
    if (target.Label(test.rows[i]) != y) continue;
    if (surrogate && surrogate->Label(test.rows[i]) != y) continue;
    eligible[y].push_back(i);
  }
  AttackSet out;
  size_t kept = 0;
  Rng rng(seed);
  std::vector<size_t> chosen;
  for (int c = 0; c < k; ++c) {
    if (eligible[c].empty()) {
      return absl::FailedPreconditionError(
          absl::StrCat("class ", c, " has no correctly classified test rows"));
    }
    kept += eligible[c].size();
    out.eligible_per_class.push_back(static_cast<int>(eligible[c].size()));
    const size_t take = std::min<size_t>(per_class_count, eligible[c].size());
    std::sample(eligible[c].begin(), eligible[c].end(), std::back_inserter(chosen),
                take, rng);
    out.drawn_per_class.push_back(static_cast<int>(take));
    out.shortfall.push_back(per_class_count - static_cast<int>(take));
  }
  std::sort(chosen.begin(), chosen.end());
  out.retention_rate = static_cast<double>(kept) / test.rows.size();
  out.source_rows = chosen;
  out.data = SelectRows(test, chosen);
  return out;
}

}  // namespace tabadv
