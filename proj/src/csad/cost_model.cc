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


#include "tabadv/csad/cost_model.h"

#include <cmath>

#include "absl/status/status.h"

namespace tabadv {

absl::StatusOr<double> CsadCostRatio(std::span<const double> class_counts,
                                     double alpha) {
  if (!(alpha > 0.0)) return absl::InvalidArgumentError("alpha must be > 0");
  double n = 0.0;
  for (const double c : class_counts) {
    if (!(c >= 0.0)) {
      return absl::InvalidArgumentError("class counts must be >= 0");
    }
    n += c;
  }
  if (!(n >= 1.0)) return absl::InvalidArgumentError("total count n = 0");
  double ratio = 0.0;
  for (const double c : class_counts) ratio += std::pow(c / n, alpha);
  return ratio;
}

}  // namespace tabadv
