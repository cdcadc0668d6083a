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


#ifndef TABADV_ATTACKS_BLACK_BOX_H_
#define TABADV_ATTACKS_BLACK_BOX_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "tabadv/coherence/constraints.h"
#include "tabadv/common/random.h"
#include "tabadv/common/vec.h"
#include "tabadv/learners/classifier.h"

namespace tabadv {

// Label-only view of a model that counts every prediction it serves.
// Not thread-safe; give each attack run its own handle.
class BlackBoxHandle {
 public:
  explicit BlackBoxHandle(const Classifier& model) : model_(&model) {}

  int Label(std::span<const double> x) {
    ++queries_;
    return model_->Label(x);
  }
  double Proba(std::span<const double> x) {
    ++queries_;
    return model_->Proba(x);
  }

  int64_t queries() const { return queries_; }
  int num_features() const { return model_->num_features(); }

 private:
  const Classifier* model_;
  int64_t queries_ = 0;
};

struct AttackOutcome {
  bool success = false;
  Vec x_adv;
  int64_t queries = 0;
  int iterations = 0;
  // Distance to x of each accepted candidate, in acceptance order.
  std::vector<double> l2_trace;
};

// Per-feature Normal(mean, stddev) used to draw random starting points.
struct NormalInit {
  Vec mean;
  Vec stddev;

  static NormalInit Fit(const std::vector<Vec>& rows);
};

absl::Status InvalidStartError(absl::string_view detail);
absl::Status InitFailedError(absl::string_view detail);
bool IsInvalidStart(const absl::Status& s);
bool IsInitFailed(const absl::Status& s);

// 1 - ||x - x_adv|| / ||x||, with the denominator floored at 1.
double Similarity(std::span<const double> x, std::span<const double> x_adv);

// Draws projected samples from `init` until the model misclassifies one.
absl::StatusOr<Vec> RandomAdversarialSeed(BlackBoxHandle& m,
                                          std::span<const double> x, int y,
                                          const NormalInit& init,
                                          int max_steps,
                                          const ConstraintSet& c,
                                          const DependencyRegistry& reg,
                                          Rng& rng);

}  // namespace tabadv

#endif  // TABADV_ATTACKS_BLACK_BOX_H_
