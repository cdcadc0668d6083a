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

#include "tabadv/coherence/constraints.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "absl/strings/str_cat.h"
#include "tabadv/common/status_macros.h"

namespace tabadv {
namespace {

double Quantile(Vec v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(v.size() - 1, lo + 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

ConstraintSet ConstraintSet::FromSchema(const Schema& schema) {
  ConstraintSet c;
  c.features = schema.features;
  c.immutable = schema.ImmutableIndices();
  return c;
}

absl::Status ApplyPercentileClamps(const Dataset& ds, double lower_q,
                                   double upper_q, ConstraintSet* c) {
  if (!(lower_q >= 0.0 && lower_q <= upper_q && upper_q <= 1.0)) {
    return absl::InvalidArgumentError("quantiles must satisfy 0<=lo<=hi<=1");
  }
  if (ds.size() == 0) return absl::InvalidArgumentError("empty dataset");
  c->clamp_lo.assign(c->size(), 0.0);
  c->clamp_hi.assign(c->size(), 0.0);
  for (int j = 0; j < c->size(); ++j) {
    const FeatureSpec& f = c->features[j];
    double lo = f.min, hi = f.max;
    if (f.directly_perturbable()) {
      const Vec col = ds.Column(j);
      lo = Quantile(col, lower_q);
      hi = Quantile(col, upper_q);
      if (IsDiscrete(f.kind)) {
        lo = std::floor(lo);
        hi = std::ceil(hi);
      }
      lo = std::clamp(lo, f.min, f.max);
      hi = std::clamp(hi, f.min, f.max);
    }
    c->clamp_lo[j] = lo;
    c->clamp_hi[j] = hi;
  }
  return absl::OkStatus();
}

double RoundToKind(const FeatureSpec& f, double v) {
  switch (f.kind) {
    case FeatureKind::kContinuous:
      return v;
    case FeatureKind::kBinary:
      return v >= 0.5 ? 1.0 : 0.0;
    case FeatureKind::kInteger:
    case FeatureKind::kCategorical:
      return std::round(v);
  }
  return v;
}

Vec DependencyRegistry::Inputs(std::span<const double> x) const {
  Vec in;
  in.reserve(input_features_.size());
  for (const int j : input_features_) in.push_back(x[j]);
  return in;
}

double DependencyRegistry::Predict(int feature,
                                   std::span<const double> x) const {
  return models_.at(feature).Value(Inputs(x));
}

absl::StatusOr<DependencyRegistry> FitDependencyModels(
    const Dataset& train, const std::vector<int>& dependents,
    const BoostingParams& params,
    const std::map<int, BoostingParams>& overrides) {
  if (dependents.empty()) return DependencyRegistry();
  const int d = train.num_features();
  std::set<int> excluded;
  for (const int j : train.schema.DependentIndices()) excluded.insert(j);
  for (const int j : dependents) {
    if (j < 0 || j >= d) {
      return absl::InvalidArgumentError(
          absl::StrCat("dependent index ", j, " out of range"));
    }
    if (!train.schema.features[j].dependent) {
      return absl::InvalidArgumentError(
          absl::StrCat("feature ", train.schema.features[j].name,
                       " is not flagged dependent in the schema"));
    }
    excluded.insert(j);
  }
  std::vector<int> inputs;
  for (int j = 0; j < d; ++j) {
    if (excluded.count(j) == 0) inputs.push_back(j);
  }
  if (inputs.empty()) {
    return absl::InvalidArgumentError(
        "dependent set covers all features; no regressor inputs left");
  }
  std::vector<Vec> x(train.size());
  for (size_t r = 0; r < train.size(); ++r) {
    x[r].reserve(inputs.size());
    for (const int j : inputs) x[r].push_back(train.rows[r][j]);
  }
  std::map<int, TreeEnsemble> models;
  for (const int j : dependents) {
    const auto it = overrides.find(j);
    const BoostingParams& p = it == overrides.end() ? params : it->second;
    ASSIGN_OR_RETURN(TreeEnsemble m, FitRegressionGbm(x, train.Column(j), p));
    models.emplace(j, std::move(m));
  }
  return DependencyRegistry(std::move(inputs), std::move(models));
}

Vec TabularModify(std::span<const double> x, std::span<const double> x_adv,
                  const ConstraintSet& c, const DependencyRegistry& reg) {
  Vec out(x_adv.begin(), x_adv.end());
  const bool clamped = !c.clamp_lo.empty();
  for (int j = 0; j < c.size(); ++j) {
    const FeatureSpec& f = c.features[j];
    double lo = f.min, hi = f.max;
    if (clamped) {
      lo = c.clamp_lo[j];
      hi = c.clamp_hi[j];
    }
    double v = out[j];
    if (std::isnan(v)) v = x[j];
    out[j] = std::clamp(v, lo, hi);
  }
  for (int j = 0; j < c.size(); ++j) {
    out[j] = RoundToKind(c.features[j], out[j]);
  }
  for (const int j : c.immutable) out[j] = x[j];
  if (!reg.empty()) {
    const Vec inputs = reg.Inputs(out);
    for (const auto& [j, model] : reg.models()) {
      const FeatureSpec& f = c.features[j];
      const double v = RoundToKind(f, model.Value(inputs));
      out[j] = std::clamp(v, f.min, f.max);
    }
  }
  return out;
}

absl::Status CheckConstraints(std::span<const double> x,
                              std::span<const double> x_adv,
                              const ConstraintSet& c) {
  if (static_cast<int>(x_adv.size()) != c.size() ||
      static_cast<int>(x.size()) != c.size()) {
    return absl::InvalidArgumentError("dimension mismatch");
  }
  for (int j = 0; j < c.size(); ++j) {
    const FeatureSpec& f = c.features[j];
    const double v = x_adv[j];
    if (!std::isfinite(v) || v < f.min || v > f.max) {
      return absl::OutOfRangeError(
          absl::StrCat(f.name, ": value ", v, " out of range"));
    }
    if (IsDiscrete(f.kind) && v != std::round(v)) {
      return absl::InvalidArgumentError(
          absl::StrCat(f.name, ": non-integral value ", v));
    }
  }
  for (const int j : c.immutable) {
    if (x_adv[j] != x[j]) {
      return absl::FailedPreconditionError(
          absl::StrCat(c.features[j].name, ": immutable feature changed"));
    }
  }
  return absl::OkStatus();
}

}  // namespace tabadv
