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

#include "tabadv/metrics/metrics.h"

#include <algorithm>
#include <cmath>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"
#include "tabadv/coherence/constraints.h"
#include "tabadv/common/status_macros.h"

namespace tabadv {
namespace {

absl::Status CheckAligned(size_t a, size_t b) {
  if (a != b) {
    return absl::InvalidArgumentError(
        absl::StrFormat("length mismatch: %d vs %d", a, b));
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<int> L0(std::span<const double> x, std::span<const double> x_adv,
                       std::span<const FeatureSpec> features) {
  RETURN_IF_ERROR(CheckAligned(x.size(), x_adv.size()));
  if (!features.empty()) RETURN_IF_ERROR(CheckAligned(x.size(), features.size()));
  int count = 0;
  for (size_t j = 0; j < x.size(); ++j) {
    double a = x[j], b = x_adv[j];
    if (!features.empty()) {
      a = RoundToKind(features[j], a);
      b = RoundToKind(features[j], b);
    }
    count += std::abs(a - b) > kL0Tolerance;
  }
  return count;
}

absl::StatusOr<double> L2(std::span<const double> x,
                          std::span<const double> x_adv) {
  RETURN_IF_ERROR(CheckAligned(x.size(), x_adv.size()));
  double s = 0.0;
  for (size_t j = 0; j < x.size(); ++j) s += (x[j] - x_adv[j]) * (x[j] - x_adv[j]);
  return std::sqrt(s);
}

absl::StatusOr<SuccessRates> ComputeSuccessRates(const RunLedger& ledger,
                                                 AttackFamily family) {
  if (ledger.empty()) return absl::InvalidArgumentError("empty ledger");
  const double n = static_cast<double>(ledger.size());
  int target = 0, surrogate = 0, both = 0;
  for (const LedgerEntry& e : ledger) {
    target += e.target_success;
    surrogate += e.surrogate_success;
    both += e.surrogate_success && e.target_success;
  }
  SuccessRates r;
  r.attack_set = static_cast<int>(ledger.size());
  r.sr = target / n;
  if (family == AttackFamily::kTransfer) {
    r.surrogate_sr = surrogate / n;
    r.overall_sr = both / n;
    if (surrogate > 0) r.transfer_sr = static_cast<double>(both) / surrogate;
  }
  return r;
}

absl::StatusOr<QueryStats> ComputeQueryStats(const RunLedger& ledger) {
  if (ledger.empty()) return absl::InvalidArgumentError("empty ledger");
  std::vector<int64_t> q;
  q.reserve(ledger.size());
  for (const LedgerEntry& e : ledger) q.push_back(e.queries);
  std::sort(q.begin(), q.end());
  QueryStats s;
  double sum = 0.0;
  for (const int64_t v : q) sum += static_cast<double>(v);
  s.mean = sum / q.size();
  const size_t mid = q.size() / 2;
  s.median = q.size() % 2 ? q[mid] : 0.5 * (q[mid - 1] + q[mid]);
  s.max = q.back();
  return s;
}

absl::StatusOr<PerturbationSummary> SummarizePerturbations(
    const RunLedger& ledger, std::span<const FeatureSpec> features) {
  PerturbationSummary s;
  for (const LedgerEntry& e : ledger) {
    if (!e.target_success) continue;
    ASSIGN_OR_RETURN(const int l0, L0(e.x, e.x_adv, features));
    ASSIGN_OR_RETURN(const double l2, L2(e.x, e.x_adv));
    ++s.count;
    s.mean_l0 += l0;
    s.mean_l2 += l2;
  }
  if (s.count > 0) {
    s.mean_l0 /= s.count;
    s.mean_l2 /= s.count;
  }
  return s;
}

double TimeQueryAttack(const EffortModel& e) {
  return e.queries * e.query_time * e.query_time * e.alpha_q * e.beta;
}

double TimeTransferAttack(const EffortModel& e) {
  return TimeQueryAttack(e) + e.surrogate_train_time + e.query_time;
}

}  // namespace tabadv
