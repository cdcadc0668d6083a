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

#ifndef TABADV_COHERENCE_CONSTRAINTS_H_
#define TABADV_COHERENCE_CONSTRAINTS_H_

#include <map>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "tabadv/common/vec.h"
#include "tabadv/learners/tree.h"
#include "tabadv/schema/schema.h"

namespace tabadv {

// Per-feature validity rules derived from a schema.
struct ConstraintSet {
  std::vector<FeatureSpec> features;
  std::vector<int> immutable;
  // Optional tighter clip bounds (e.g. benign percentiles). Same length as
  // `features` when set; immutables and dependents ignore them.
  Vec clamp_lo;
  Vec clamp_hi;

  static ConstraintSet FromSchema(const Schema& schema);
  int size() const { return static_cast<int>(features.size()); }
};

// Narrows the clip range of every directly perturbable feature to the
// [lower_q, upper_q] empirical quantiles of `ds`. Discrete bounds are widened
// to the enclosing integers.
absl::Status ApplyPercentileClamps(const Dataset& ds, double lower_q,
                                   double upper_q, ConstraintSet* c);

// Nearest valid value for the feature's kind (no clipping).
double RoundToKind(const FeatureSpec& f, double v);

// One regressor per dependent feature. Every regressor reads the same input
// layout: all features that are not flagged dependent in the schema, so
// correcting one dependent feature can never change another's inputs.
class DependencyRegistry {
 public:
  DependencyRegistry() = default;
  DependencyRegistry(std::vector<int> input_features,
                     std::map<int, TreeEnsemble> models)
      : input_features_(std::move(input_features)),
        models_(std::move(models)) {}

  bool empty() const { return models_.empty(); }
  const std::vector<int>& input_features() const { return input_features_; }
  const std::map<int, TreeEnsemble>& models() const { return models_; }

  Vec Inputs(std::span<const double> x) const;
  double Predict(int feature, std::span<const double> x) const;

 private:
  std::vector<int> input_features_;
  std::map<int, TreeEnsemble> models_;
};

// Fits a squared-error boosted regressor for each dependent feature on the
// given rows. `overrides` replaces the shared parameters for specific
// features (e.g. a different learning rate).
absl::StatusOr<DependencyRegistry> FitDependencyModels(
    const Dataset& train, const std::vector<int>& dependents,
    const BoostingParams& params,
    const std::map<int, BoostingParams>& overrides = {});

// Projects x_adv onto the valid set, in order: clip to range, round to the
// feature kind, restore immutables from x, recompute dependents from the
// registry (then round and clip them).
Vec TabularModify(std::span<const double> x, std::span<const double> x_adv,
                  const ConstraintSet& c, const DependencyRegistry& reg);

// First violated rule, if any: range, integrality, or an immutable feature
// that differs from the original.
absl::Status CheckConstraints(std::span<const double> x,
                              std::span<const double> x_adv,
                              const ConstraintSet& c);

}  // namespace tabadv

#endif  // TABADV_COHERENCE_CONSTRAINTS_H_
