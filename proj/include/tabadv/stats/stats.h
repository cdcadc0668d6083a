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

#ifndef TABADV_STATS_STATS_H_
#define TABADV_STATS_STATS_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"

namespace tabadv {

enum class EffectKind { kCliffsDelta, kCohensH, kCohensG, kRankBiserial };
enum class EffectCategory { kSmall, kMedium, kLarge };

absl::string_view EffectKindName(EffectKind kind);
absl::string_view EffectCategoryName(EffectCategory c);

inline constexpr double kSignificanceLevel = 0.05;
// Sample size at or below which rank tests use the exact distribution.
inline constexpr int kExactRankLimit = 20;

struct StatResult {
  std::string test;
  double statistic = 0.0;
  double p_raw = 1.0;
  double p_adjusted = 1.0;
  double effect_value = 0.0;
  EffectKind effect_kind = EffectKind::kCliffsDelta;
  EffectCategory category = EffectCategory::kSmall;
  bool significant = false;
  bool exact = false;
  // McNemar only: 2g, ranging over [0, 1].
  std::optional<double> doubled_g;
};

double NormalTwoSidedP(double z);

// U counts x_i > y_j plus half of the ties. Exact when max(|x|, |y|) <= 20.
absl::StatusOr<StatResult> MannWhitneyU(std::span<const double> x,
                                        std::span<const double> y);

absl::StatusOr<StatResult> ProportionsZTest(int k1, int n1, int k2, int n2);

absl::StatusOr<StatResult> McNemarExact(int b, int c);

// Statistic is W+. Zero differences are dropped first.
absl::StatusOr<StatResult> WilcoxonSignedRank(std::span<const double> diffs);

absl::StatusOr<std::vector<double>> HolmAdjust(std::span<const double> p);

// Fills p_adjusted and significant across the family.
absl::Status ApplyHolm(std::vector<StatResult>& family);

absl::StatusOr<EffectCategory> EffectSizeCategory(double value,
                                                  EffectKind kind);

// True when any Holm-adjusted pairwise comparison in the group is
// significant.
bool Heterogeneous(const std::vector<StatResult>& pairwise);

}  // namespace tabadv

#endif  // TABADV_STATS_STATS_H_
