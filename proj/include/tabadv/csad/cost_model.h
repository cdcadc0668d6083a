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


#ifndef TABADV_CSAD_COST_MODEL_H_
#define TABADV_CSAD_COST_MODEL_H_

#include <span>

#include "absl/status/statusor.h"

namespace tabadv {

// Training cost of per-class detectors relative to one pooled detector for
// an O(m^alpha) learner: sum_i n_i^alpha / n^alpha.
absl::StatusOr<double> CsadCostRatio(std::span<const double> class_counts,
                                     double alpha);

}  // namespace tabadv

#endif  // TABADV_CSAD_COST_MODEL_H_
