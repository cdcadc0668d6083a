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

#ifndef TABADV_LEARNERS_CLASSIFIER_H_
#define TABADV_LEARNERS_CLASSIFIER_H_

#include <span>

#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"

namespace tabadv {

// Binary classifier over fixed-width samples. Class 1 iff proba >= 0.5, so a
// tie at exactly 0.5 predicts class 1.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual int num_features() const = 0;

  // Probability of class 1. No dimension check.
  virtual double Proba(std::span<const double> x) const = 0;

  int Label(std::span<const double> x) const { return Proba(x) >= 0.5 ? 1 : 0; }

  absl::StatusOr<double> PredictProba(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != num_features()) {
      return absl::InvalidArgumentError(
          absl::StrCat("dimension mismatch: got ", x.size(), ", expected ",
                       num_features()));
    }
    return Proba(x);
  }

  absl::StatusOr<int> Predict(std::span<const double> x) const {
    const absl::StatusOr<double> p = PredictProba(x);
    if (!p.ok()) return p.status();
    return *p >= 0.5 ? 1 : 0;
  }
};

}  // namespace tabadv

#endif  // TABADV_LEARNERS_CLASSIFIER_H_
