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

#include "tabadv/stats/stats.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"
#include "tabadv/common/status_macros.h"

namespace tabadv {
namespace {

// Relative slack when comparing a null statistic with the observed one.
constexpr double kTieSlack = 1e-9;

// Doubled midranks of v (integers) and the tie-group sizes.
std::vector<int> DoubledMidranks(std::span<const double> v,
                                 std::vector<int>* tie_sizes) {
  std::vector<int> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return v[a] < v[b]; });
  std::vector<int> ranks(v.size());
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    // Positions i..j hold ranks i+1..j+1; doubled mean is i+j+2.
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = static_cast<int>(i + j + 2);
    if (tie_sizes) tie_sizes->push_back(static_cast<int>(j - i + 1));
    i = j + 1;
  }
  return ranks;
}

double TieTerm(const std::vector<int>& ties) {
  double s = 0.0;
  for (const int t : ties) s += static_cast<double>(t) * t * t - t;
  return s;
}

// Null distribution of the sum of a size-k subset of `items`, as counts
// indexed by sum. Counts are doubles to avoid overflow.
std::vector<double> SubsetSumCounts(const std::vector<int>& items, int k) {
  const int total = std::accumulate(items.begin(), items.end(), 0);
  // ways[c][s]: subsets of size c with sum s.
  std::vector<std::vector<double>> ways(k + 1, std::vector<double>(total + 1));
  ways[0][0] = 1.0;
  for (const int item : items) {
    for (int c = k; c >= 1; --c) {
      for (int s = total; s >= item; --s) ways[c][s] += ways[c - 1][s - item];
    }
  }
  return ways[k];
}

// Sum of every subset (any size) of items, as counts indexed by sum.
std::vector<double> AnySubsetSumCounts(const std::vector<int>& items) {
  const int total = std::accumulate(items.begin(), items.end(), 0);
  std::vector<double> ways(total + 1);
  ways[0] = 1.0;
  for (const int item : items) {
    for (int s = total; s >= item; --s) ways[s] += ways[s - item];
  }
  return ways;
}

// P(|S - center| >= |observed - center|) under the counts.
double TwoSidedFromCounts(const std::vector<double>& counts, double center,
                          double observed) {
  const double dev = std::abs(observed - center);
  double hit = 0.0, all = 0.0;
  for (size_t s = 0; s < counts.size(); ++s) {
    if (counts[s] == 0.0) continue;
    all += counts[s];
    if (std::abs(s - center) >= dev - kTieSlack * (1.0 + dev)) hit += counts[s];
  }
  return std::min(1.0, hit / all);
}

void Finish(StatResult& r) {
  r.p_raw = std::clamp(r.p_raw, 0.0, 1.0);
  r.p_adjusted = r.p_raw;
  r.significant = r.p_adjusted < kSignificanceLevel;
  r.category = *EffectSizeCategory(r.effect_value, r.effect_kind);
}

}  // namespace

absl::string_view EffectKindName(EffectKind kind) {
  switch (kind) {
    case EffectKind::kCliffsDelta:
      return "cliffs_delta";
    case EffectKind::kCohensH:
      return "cohens_h";
    case EffectKind::kCohensG:
      return "cohens_g";
    case EffectKind::kRankBiserial:
      return "rank_biserial";
  }
  return "unknown";
}

absl::string_view EffectCategoryName(EffectCategory c) {
  switch (c) {
    case EffectCategory::kSmall:
      return "S";
    case EffectCategory::kMedium:
      return "M";
    case EffectCategory::kLarge:
      return "L";
  }
  return "?";
}

double NormalTwoSidedP(double z) {
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

absl::StatusOr<StatResult> MannWhitneyU(std::span<const double> x,
                                        std::span<const double> y) {
  if (x.empty() || y.empty()) return absl::InvalidArgumentError("empty sample");
  const int n1 = static_cast<int>(x.size()), n2 = static_cast<int>(y.size());
  double greater = 0.0, less = 0.0;
  for (const double a : x) {
    for (const double b : y) {
      greater += a > b;
      less += a < b;
    }
  }
  StatResult r;
  r.test = "mann_whitney_u";
  r.statistic = greater + 0.5 * (static_cast<double>(n1) * n2 - greater - less);
  r.effect_kind = EffectKind::kCliffsDelta;
  r.effect_value = (greater - less) / (static_cast<double>(n1) * n2);

  std::vector<double> pooled(x.begin(), x.end());
  pooled.insert(pooled.end(), y.begin(), y.end());
  std::vector<int> ties;
  const std::vector<int> ranks = DoubledMidranks(pooled, &ties);
  const int n = n1 + n2;
  if (std::max(n1, n2) <= kExactRankLimit) {
    // Doubled rank sum of x: 2U + n1(n1+1).
    const std::vector<double> counts = SubsetSumCounts(ranks, n1);
    const double observed = 2.0 * r.statistic + n1 * (n1 + 1.0);
    const double center = n1 * (n + 1.0);
    r.p_raw = TwoSidedFromCounts(counts, center, observed);
    r.exact = true;
  } else {
    const double mean = 0.5 * n1 * n2;
    const double var = n1 * static_cast<double>(n2) / 12.0 *
                       ((n + 1.0) - TieTerm(ties) / (n * (n - 1.0)));
    const double dev = std::max(0.0, std::abs(r.statistic - mean) - 0.5);
    r.p_raw = var > 0.0 ? NormalTwoSidedP(dev / std::sqrt(var)) : 1.0;
  }
  Finish(r);
  return r;
}

absl::StatusOr<StatResult> ProportionsZTest(int k1, int n1, int k2, int n2) {
  if (n1 < 1 || n2 < 1) return absl::InvalidArgumentError("n must be >= 1");
  if (k1 < 0 || k1 > n1 || k2 < 0 || k2 > n2) {
    return absl::InvalidArgumentError("k must lie in [0, n]");
  }
  const double p1 = static_cast<double>(k1) / n1;
  const double p2 = static_cast<double>(k2) / n2;
  const double pool = static_cast<double>(k1 + k2) / (n1 + n2);
  const double se = std::sqrt(pool * (1.0 - pool) * (1.0 / n1 + 1.0 / n2));
  StatResult r;
  r.test = "proportions_ztest";
  r.statistic = se > 0.0 ? (p1 - p2) / se : 0.0;
  r.p_raw = se > 0.0 ? NormalTwoSidedP(r.statistic) : 1.0;
  r.effect_kind = EffectKind::kCohensH;
  r.effect_value = 2.0 * std::asin(std::sqrt(p1)) - 2.0 * std::asin(std::sqrt(p2));
  Finish(r);
  return r;
}

absl::StatusOr<StatResult> McNemarExact(int b, int c) {
  if (b < 0 || c < 0) return absl::InvalidArgumentError("counts must be >= 0");
  if (b + c == 0) return absl::InvalidArgumentError("b + c = 0");
  const int n = b + c, k = std::min(b, c);
  // Binomial(n, 1/2) lower tail in log space.
  double tail = 0.0;
  for (int i = 0; i <= k; ++i) {
    tail += std::exp(std::lgamma(n + 1.0) - std::lgamma(i + 1.0) -
                     std::lgamma(n - i + 1.0) - n * std::log(2.0));
  }
  StatResult r;
  r.test = "mcnemar_exact";
  r.statistic = k;
  r.p_raw = std::min(1.0, 2.0 * tail);
  r.effect_kind = EffectKind::kCohensG;
  r.effect_value = static_cast<double>(std::max(b, c)) / n - 0.5;
  r.doubled_g = 2.0 * r.effect_value;
  r.exact = true;
  Finish(r);
  return r;
}

absl::StatusOr<StatResult> WilcoxonSignedRank(std::span<const double> diffs) {
  std::vector<double> nz, mag;
  for (const double d : diffs) {
    if (d != 0.0) {
      nz.push_back(d);
      mag.push_back(std::abs(d));
    }
  }
  if (nz.empty()) return absl::InvalidArgumentError("all differences are zero");
  const int n = static_cast<int>(nz.size());
  std::vector<int> ties;
  const std::vector<int> ranks = DoubledMidranks(mag, &ties);
  int plus2 = 0, total2 = 0;
  for (int i = 0; i < n; ++i) {
    total2 += ranks[i];
    if (nz[i] > 0) plus2 += ranks[i];
  }
  StatResult r;
  r.test = "wilcoxon_signed_rank";
  r.statistic = 0.5 * plus2;
  r.effect_kind = EffectKind::kRankBiserial;
  r.effect_value = (2.0 * plus2 - total2) / total2;
  if (n <= kExactRankLimit) {
    r.p_raw = TwoSidedFromCounts(AnySubsetSumCounts(ranks), 0.5 * total2, plus2);
    r.exact = true;
  } else {
    const double mean = n * (n + 1.0) / 4.0;
    const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - TieTerm(ties) / 48.0;
    const double dev = std::max(0.0, std::abs(r.statistic - mean) - 0.5);
    r.p_raw = var > 0.0 ? NormalTwoSidedP(dev / std::sqrt(var)) : 1.0;
  }
  Finish(r);
  return r;
}

absl::StatusOr<std::vector<double>> HolmAdjust(std::span<const double> p) {
  for (const double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) {
      return absl::InvalidArgumentError(absl::StrFormat("p = %g outside [0, 1]", v));
    }
  }
  const size_t m = p.size();
  std::vector<size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return p[a] < p[b]; });
  std::vector<double> adj(m);
  double running = 0.0;
  for (size_t i = 0; i < m; ++i) {
    running = std::max(running, std::min(1.0, (m - i) * p[order[i]]));
    adj[order[i]] = running;
  }
  return adj;
}

absl::Status ApplyHolm(std::vector<StatResult>& family) {
  std::vector<double> raw;
  raw.reserve(family.size());
  for (const StatResult& r : family) raw.push_back(r.p_raw);
  ASSIGN_OR_RETURN(const std::vector<double> adj, HolmAdjust(raw));
  for (size_t i = 0; i < family.size(); ++i) {
    family[i].p_adjusted = adj[i];
    family[i].significant = adj[i] < kSignificanceLevel;
  }
  return absl::OkStatus();
}

absl::StatusOr<EffectCategory> EffectSizeCategory(double value,
                                                  EffectKind kind) {
  if (!std::isfinite(value)) return absl::InvalidArgumentError("non-finite effect");
  double medium = 0.0, large = 0.0;
  switch (kind) {
    case EffectKind::kCliffsDelta:
      medium = 0.33, large = 0.474;
      break;
    case EffectKind::kCohensH:
      medium = 0.5, large = 0.8;
      break;
    case EffectKind::kCohensG:
      medium = 0.15, large = 0.25;
      break;
    case EffectKind::kRankBiserial:
      medium = 0.3, large = 0.5;
      break;
    default:
      return absl::InvalidArgumentError("unknown effect kind");
  }
  const double a = std::abs(value);
  if (a >= large) return EffectCategory::kLarge;
  if (a >= medium) return EffectCategory::kMedium;
  return EffectCategory::kSmall;
}

bool Heterogeneous(const std::vector<StatResult>& pairwise) {
  std::vector<StatResult> copy = pairwise;
  if (!ApplyHolm(copy).ok()) return false;
  return std::any_of(copy.begin(), copy.end(),
                     [](const StatResult& r) { return r.significant; });
}

}  // namespace tabadv
