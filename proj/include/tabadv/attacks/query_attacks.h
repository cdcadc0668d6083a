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


#ifndef TABADV_ATTACKS_QUERY_ATTACKS_H_
#define TABADV_ATTACKS_QUERY_ATTACKS_H_

#include <cstdint>
#include <span>

#include "absl/status/statusor.h"
#include "tabadv/attacks/black_box.h"
#include "tabadv/coherence/constraints.h"
#include "tabadv/common/random.h"
#include "tabadv/common/vec.h"

namespace tabadv {

struct BoundaryConfig {
  // Initial contraction step toward x.
  double epsilon = 1.0;
  // Initial orthogonal step, relative to the current distance.
  double delta = 1.0;
  int max_iter = 3000;
  int num_trials = 20;
  // Multiplier on both initial step sizes.
  double step_adaptation = 1.0;
  // Steps grow by this factor when more than half of the trials succeed and
  // shrink by it otherwise.
  double adaptation_factor = 1.5;
  int max_init_steps = 1000;
  double similarity_threshold = 1.0;
  // 0 means unlimited.
  int64_t max_queries = 0;
};

struct HsjConfig {
  int max_iter = 50;
  int max_eval = 10000;
  int init_eval = 500;
  // Random draws allowed when looking for a misclassified start.
  int init_size = 100;
  // Bisection stops when the bracket is below this fraction of its start.
  double search_tolerance = 1e-3;
  int max_step_halvings = 30;
  double similarity_threshold = 1.0;
  int64_t max_queries = 0;
};

absl::Status ValidateBoundaryConfig(const BoundaryConfig& cfg);
absl::Status ValidateHsjConfig(const HsjConfig& cfg);

struct OrthogonalStep {
  Vec sphere;     // Before contraction; same distance to x as x_adv.
  Vec candidate;  // After contraction toward x.
};

absl::StatusOr<OrthogonalStep> OrthogonalPerturbation(
    std::span<const double> x, std::span<const double> x_adv, double delta,
    double epsilon, Rng& rng);

// Bisects the segment [x, x_adv] until its width is at most `tol` (distance
// units) and returns the misclassified end. Queries both endpoints first.
absl::StatusOr<Vec> BinarySearchBoundary(BlackBoxHandle& m,
                                         std::span<const double> x,
                                         std::span<const double> x_adv, int y,
                                         double tol);

// Unit-norm Monte-Carlo estimate of the direction that increases
// misclassification around a boundary point.
absl::StatusOr<Vec> EstimateUpdate(BlackBoxHandle& m,
                                   std::span<const double> x_boundary, int y,
                                   int n_eval, double radius, Rng& rng);

absl::StatusOr<AttackOutcome> BoundaryAttack(BlackBoxHandle& m,
                                             std::span<const double> x, int y,
                                             const BoundaryConfig& cfg,
                                             const NormalInit& init,
                                             const ConstraintSet& c,
                                             const DependencyRegistry& reg,
                                             Rng& rng);

absl::StatusOr<AttackOutcome> HopSkipJumpAttack(BlackBoxHandle& m,
                                                std::span<const double> x,
                                                int y, const HsjConfig& cfg,
                                                const NormalInit& init,
                                                const ConstraintSet& c,
                                                const DependencyRegistry& reg,
                                                Rng& rng);

}  // namespace tabadv

#endif  // TABADV_ATTACKS_QUERY_ATTACKS_H_
