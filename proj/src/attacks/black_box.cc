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


#include "tabadv/attacks/black_box.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "absl/strings/match.h"
#include "absl/strings/str_cat.h"

namespace tabadv {

NormalInit NormalInit::Fit(const std::vector<Vec>& rows) {
  NormalInit init;
  if (rows.empty()) return init;
  const size_t d = rows[0].size();
  const double n = static_cast<double>(rows.size());
  init.mean.assign(d, 0.0);
  init.stddev.assign(d, 0.0);
  for (const Vec& r : rows) {
    for (size_t j = 0; j < d; ++j) init.mean[j] += r[j] / n;
  }
  for (const Vec& r : rows) {
    for (size_t j = 0; j < d; ++j) {
      init.stddev[j] += (r[j] - init.mean[j]) * (r[j] - init.mean[j]) / n;
    }
  }
  for (double& s : init.stddev) s = std::sqrt(s);
  return init;
}

absl::Status InvalidStartError(absl::string_view detail) {
  return absl::FailedPreconditionError(absl::StrCat("InvalidStart: ", detail));
}

absl::Status InitFailedError(absl::string_view detail) {
  return absl::NotFoundError(absl::StrCat("InitFailed: ", detail));
}

bool IsInvalidStart(const absl::Status& s) {
  return absl::IsFailedPrecondition(s) &&
         absl::StartsWith(s.message(), "InvalidStart");
}

bool IsInitFailed(const absl::Status& s) {
  return absl::IsNotFound(s) && absl::StartsWith(s.message(), "InitFailed");
}

double Similarity(std::span<const double> x, std::span<const double> x_adv) {
  return 1.0 - Distance(x, x_adv) / std::max(Norm2(x), 1.0);
}

absl::StatusOr<Vec> RandomAdversarialSeed(BlackBoxHandle& m,
                                          std::span<const double> x, int y,
                                          const NormalInit& init,
                                          int max_steps,
                                          const ConstraintSet& c,
                                          const DependencyRegistry& reg,
                                          Rng& rng) {
  if (init.mean.size() != x.size() || init.stddev.size() != x.size()) {
    return absl::InvalidArgumentError("init statistics dimension mismatch");
  }
  std::normal_distribution<double> n01(0.0, 1.0);
  Vec z(x.size());
  for (int step = 0; step < max_steps; ++step) {
    for (size_t j = 0; j < x.size(); ++j) {
      z[j] = init.mean[j] + init.stddev[j] * n01(rng);
    }
    Vec seed = TabularModify(x, z, c, reg);
    if (m.Label(seed) != y) return seed;
  }
  return InitFailedError(
      absl::StrCat("no misclassified seed in ", max_steps, " draws"));
}

}  // namespace tabadv
