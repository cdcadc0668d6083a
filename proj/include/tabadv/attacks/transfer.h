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


#ifndef TABADV_ATTACKS_TRANSFER_H_
#define TABADV_ATTACKS_TRANSFER_H_

#include <cstdint>
#include <set>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "tabadv/attacks/black_box.h"
#include "tabadv/coherence/constraints.h"
#include "tabadv/common/random.h"
#include "tabadv/common/vec.h"
#include "tabadv/learners/mlp.h"
#include "tabadv/learners/surrogate.h"
#include "tabadv/schema/schema.h"

namespace tabadv {

// |Pearson| between directly perturbable features; every other entry
// (including zero-variance columns) is 0.
std::vector<Vec> MutableCorrelationTable(const Dataset& ds);

class FeatureSelector {
 public:
  static FeatureSelector Random(std::vector<bool> eligible,
                                std::vector<Vec> correlation, int k,
                                int n_corr);
  // `importance` is typically the mean |SHAP| of a source ensemble.
  static FeatureSelector Importance(std::vector<bool> eligible,
                                    std::vector<Vec> correlation,
                                    Vec importance, int k, int n_corr);

  bool is_random() const { return importance_.empty(); }
  int k() const { return k_; }
  int n_corr() const { return n_corr_; }

  // New features disjoint from `already` and from every ineligible feature.
  absl::StatusOr<std::vector<int>> Select(const std::set<int>& already,
                                          Rng& rng) const;

 private:
  FeatureSelector(std::vector<bool> eligible, std::vector<Vec> correlation,
                  Vec importance, int k, int n_corr)
      : eligible_(std::move(eligible)),
        correlation_(std::move(correlation)),
        importance_(std::move(importance)),
        k_(k),
        n_corr_(n_corr) {}

  std::vector<bool> eligible_;
  std::vector<Vec> correlation_;
  Vec importance_;
  int k_;
  int n_corr_;
};

// Editable and not dependent.
std::vector<bool> EligibleFeatures(const Schema& schema);

struct TransferConfig {
  // 0 means the number of eligible features.
  int lambda_max_l0 = 0;
  double alpha_reg = 1.0;
  // Adam step size in standardized feature units.
  double learning_rate = 1.0;
  int inner_steps = 10;
};

absl::Status ValidateTransferConfig(const TransferConfig& cfg);

absl::StatusOr<double> AdvLoss(const SurrogateModel& m,
                               std::span<const double> x_adv,
                               std::span<const double> x, int y, double alpha);

// One Adam step on the adversarial loss, restricted to `selected`. The step
// is taken in the surrogate's standardized coordinates and returned in raw
// units; `opt` carries the moment estimates across calls.
absl::StatusOr<Vec> ComputePerturbation(const SurrogateModel& m,
                                        std::span<const double> x_adv,
                                        std::span<const double> x, int y,
                                        const std::set<int>& selected,
                                        double alpha, Adam& opt);

struct TransferOutcome {
  AttackOutcome attack;  // attack.success == transfer_success.
  bool surrogate_success = false;
  bool transfer_success = false;
  std::vector<int> selected;
  int rounds = 0;
  double embedding_distance = 0.0;
};

// Grows the selected set, optimizes it against the surrogate and projects
// after every step. The target is queried once, only when the surrogate
// label flips.
absl::StatusOr<TransferOutcome> TransferAttack(
    const SurrogateModel& surrogate, BlackBoxHandle& target,
    std::span<const double> x, int y, const TransferConfig& cfg,
    const FeatureSelector& sel, const ConstraintSet& c,
    const DependencyRegistry& reg, Rng& rng);

}  // namespace tabadv

#endif  // TABADV_ATTACKS_TRANSFER_H_
