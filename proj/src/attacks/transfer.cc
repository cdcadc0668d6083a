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


#include "tabadv/attacks/transfer.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "absl/strings/str_cat.h"
#include "tabadv/common/status_macros.h"
#include "tabadv/schema/preprocess.h"

namespace tabadv {

std::vector<bool> EligibleFeatures(const Schema& schema) {
  std::vector<bool> out;
  for (const FeatureSpec& f : schema.features) {
    out.push_back(f.directly_perturbable());
  }
  return out;
}

std::vector<Vec> MutableCorrelationTable(const Dataset& ds) {
  const int d = ds.num_features();
  const std::vector<bool> eligible = EligibleFeatures(ds.schema);
  std::vector<Vec> columns(d);
  for (int j = 0; j < d; ++j) {
    if (eligible[j]) columns[j] = ds.Column(j);
  }
  std::vector<Vec> table(d, Vec(d, 0.0));
  for (int a = 0; a < d; ++a) {
    for (int b = a + 1; b < d; ++b) {
      if (!eligible[a] || !eligible[b]) continue;
      table[a][b] = table[b][a] = std::abs(PearsonOrZero(columns[a], columns[b]));
    }
  }
  return table;
}

FeatureSelector FeatureSelector::Random(std::vector<bool> eligible,
                                        std::vector<Vec> correlation, int k,
                                        int n_corr) {
  return FeatureSelector(std::move(eligible), std::move(correlation), {}, k,
                         n_corr);
}

FeatureSelector FeatureSelector::Importance(std::vector<bool> eligible,
                                            std::vector<Vec> correlation,
                                            Vec importance, int k,
                                            int n_corr) {
  return FeatureSelector(std::move(eligible), std::move(correlation),
                         std::move(importance), k, n_corr);
}

absl::StatusOr<std::vector<int>> FeatureSelector::Select(
    const std::set<int>& already, Rng& rng) const {
  if (k_ < 1 || n_corr_ < 0) {
    return absl::InvalidArgumentError("need k >= 1 and n_corr >= 0");
  }
  std::set<int> taken = already;
  std::vector<int> pool;
  for (int j = 0; j < static_cast<int>(eligible_.size()); ++j) {
    if (eligible_[j] && taken.count(j) == 0) pool.push_back(j);
  }
  if (pool.empty()) return absl::ResourceExhaustedError("pool exhausted");

  std::vector<int> picks;
  if (is_random()) {
    std::sample(pool.begin(), pool.end(), std::back_inserter(picks),
                std::min<size_t>(k_, pool.size()), rng);
  } else {
    std::stable_sort(pool.begin(), pool.end(), [&](int a, int b) {
      return importance_[a] > importance_[b];
    });
    picks.assign(pool.begin(),
                 pool.begin() + std::min<size_t>(k_, pool.size()));
  }
  std::vector<int> out;
  for (const int p : picks) {
    out.push_back(p);
    taken.insert(p);
  }
  for (const int p : picks) {
    std::vector<int> partners;
    for (int j = 0; j < static_cast<int>(eligible_.size()); ++j) {
      if (eligible_[j] && taken.count(j) == 0) partners.push_back(j);
    }
    std::stable_sort(partners.begin(), partners.end(), [&](int a, int b) {
      return correlation_[p][a] > correlation_[p][b];
    });
    for (int i = 0; i < n_corr_ && i < static_cast<int>(partners.size());
         ++i) {
      out.push_back(partners[i]);
      taken.insert(partners[i]);
    }
  }
  return out;
}

absl::Status ValidateTransferConfig(const TransferConfig& cfg) {
  if (cfg.lambda_max_l0 < 0) {
    return absl::InvalidArgumentError("lambda_max_l0 must be >= 1 (or 0)");
  }
  if (!(cfg.alpha_reg >= 0.0) || !(cfg.learning_rate > 0.0)) {
    return absl::InvalidArgumentError(
        "alpha_reg must be >= 0 and learning_rate > 0");
  }
  if (cfg.inner_steps < 1) {
    return absl::InvalidArgumentError("inner_steps must be >= 1");
  }
  return absl::OkStatus();
}

absl::StatusOr<double> AdvLoss(const SurrogateModel& m,
                               std::span<const double> x_adv,
                               std::span<const double> x, int y,
                               double alpha) {
  return m.AdvLoss(x_adv, x, y, alpha);
}

absl::StatusOr<Vec> ComputePerturbation(const SurrogateModel& m,
                                        std::span<const double> x_adv,
                                        std::span<const double> x, int y,
                                        const std::set<int>& selected,
                                        double alpha, Adam& opt) {
  if (selected.empty()) {
    return absl::InvalidArgumentError("empty feature set");
  }
  ASSIGN_OR_RETURN(Vec grad, m.GradInput(x_adv, x, y, alpha));
  const Vec& scale = m.scaler().scale;
  Vec masked(grad.size(), 0.0);
  for (const int j : selected) masked[j] = grad[j] * scale[j];
  if (!AllFinite(masked)) {
    return absl::InternalError("non-finite gradient");
  }
  Vec step = opt.Delta(masked);
  for (size_t j = 0; j < step.size(); ++j) {
    step[j] = selected.count(static_cast<int>(j)) ? step[j] * scale[j] : 0.0;
  }
  return step;
}

absl::StatusOr<TransferOutcome> TransferAttack(
    const SurrogateModel& surrogate, BlackBoxHandle& target,
    std::span<const double> x, int y, const TransferConfig& cfg,
    const FeatureSelector& sel, const ConstraintSet& c,
    const DependencyRegistry& reg, Rng& rng) {
  RETURN_IF_ERROR(ValidateTransferConfig(cfg));
  if (surrogate.Label(x) != y) {
    return InvalidStartError("surrogate already misclassifies x");
  }
  int lambda = cfg.lambda_max_l0;
  if (lambda == 0) {
    for (const FeatureSpec& f : c.features) lambda += f.directly_perturbable();
  }

  TransferOutcome out;
  const int64_t start = target.queries();
  Vec x_adv(x.begin(), x.end());
  std::set<int> selected;
  Adam opt(cfg.learning_rate);
  bool flipped = false;
  while (!flipped && static_cast<int>(selected.size()) < lambda) {
    absl::StatusOr<std::vector<int>> fresh = sel.Select(selected, rng);
    if (!fresh.ok()) {
      if (absl::IsResourceExhausted(fresh.status())) break;
      return fresh.status();
    }
    selected.insert(fresh->begin(), fresh->end());
    ++out.rounds;
    for (int s = 0; s < cfg.inner_steps && !flipped; ++s) {
      ASSIGN_OR_RETURN(const Vec p,
                       ComputePerturbation(surrogate, x_adv, x, y, selected,
                                           cfg.alpha_reg, opt));
      for (size_t j = 0; j < x_adv.size(); ++j) x_adv[j] += p[j];
      x_adv = TabularModify(x, x_adv, c, reg);
      ++out.attack.iterations;
      out.attack.l2_trace.push_back(Distance(x, x_adv));
      flipped = surrogate.Label(x_adv) != y;
    }
  }
  out.surrogate_success = flipped;
  if (flipped) out.transfer_success = target.Label(x_adv) != y;
  out.selected.assign(selected.begin(), selected.end());
  out.embedding_distance = Distance(surrogate.Embed(x_adv), surrogate.Embed(x));
  out.attack.success = out.transfer_success;
  out.attack.x_adv = std::move(x_adv);
  out.attack.queries = target.queries() - start;
  return out;
}

}  // namespace tabadv
