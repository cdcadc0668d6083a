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

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "tabadv/common/vec.h"
#include "tabadv/stats/stats.h"
#include "test_util.h"

namespace tabadv {
namespace {

double UOf(const std::vector<double>& x, const std::vector<double>& y) {
  double u = 0.0;
  for (const double a : x) {
    for (const double b : y) u += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
  }
  return u;
}

// Permutation p-value over every split of the pooled sample.
double BruteMannWhitneyP(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> pooled = x;
  pooled.insert(pooled.end(), y.begin(), y.end());
  const int n = pooled.size(), n1 = x.size();
  const double center = 0.5 * x.size() * y.size();
  const double dev = std::abs(UOf(x, y) - center);
  double hit = 0, all = 0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) != n1) continue;
    std::vector<double> a, b;
    for (int i = 0; i < n; ++i) ((mask >> i) & 1 ? a : b).push_back(pooled[i]);
    all += 1;
    hit += std::abs(UOf(a, b) - center) >= dev - 1e-9;
  }
  return hit / all;
}

std::vector<double> Draw(Rng& rng, int n, int levels) {
  std::uniform_int_distribution<int> u(0, levels - 1);
  std::vector<double> v(n);
  for (double& e : v) e = u(rng);
  return v;
}

TEST(MannWhitneyTest, Examples) {
  ASSERT_OK_AND_ASSIGN(const StatResult r, MannWhitneyU(Vec{1, 2}, Vec{3, 4}));
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_EQ(r.effect_value, -1.0);
  EXPECT_EQ(r.category, EffectCategory::kLarge);
  ASSERT_OK_AND_ASSIGN(const StatResult same, MannWhitneyU(Vec{1, 2, 2, 5}, Vec{5, 2, 1, 2}));
  EXPECT_EQ(same.effect_value, 0.0);
  EXPECT_DOUBLE_EQ(same.p_raw, 1.0);
  ASSERT_OK_AND_ASSIGN(const StatResult dom, MannWhitneyU(Vec{7, 8, 9}, Vec{1, 2}));
  EXPECT_EQ(dom.effect_value, 1.0);
  EXPECT_FALSE(MannWhitneyU(Vec{}, Vec{1}).ok());
}

TEST(MannWhitneyTest, ExactMatchesEnumeration) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const int n1 = 1 + trial % 8, n2 = 1 + (trial / 8) % 8;
    const auto x = Draw(rng, n1, 2 + trial % 6);
    const auto y = Draw(rng, n2, 2 + trial % 6);
    ASSERT_OK_AND_ASSIGN(const StatResult r, MannWhitneyU(x, y));
    EXPECT_TRUE(r.exact);
    EXPECT_NEAR(r.p_raw, BruteMannWhitneyP(x, y), 1e-12) << "trial " << trial;
  }
}

TEST(MannWhitneyTest, NormalApproximationBeyondLimit) {
  std::vector<double> x, y;
  for (int i = 0; i < 30; ++i) x.push_back(i);
  for (int i = 0; i < 25; ++i) y.push_back(i + 10.5);
  ASSERT_OK_AND_ASSIGN(const StatResult r, MannWhitneyU(x, y));
  EXPECT_FALSE(r.exact);
  // No ties: sigma^2 = n1 n2 (n + 1) / 12.
  const double mean = 375.0, sd = std::sqrt(30.0 * 25 * 56 / 12);
  const double z = (std::abs(UOf(x, y) - mean) - 0.5) / sd;
  EXPECT_NEAR(r.p_raw, std::erfc(z / std::sqrt(2.0)), 1e-12);
}

TEST(ProportionsTest, Examples) {
  ASSERT_OK_AND_ASSIGN(const StatResult eq, ProportionsZTest(30, 100, 30, 100));
  EXPECT_EQ(eq.statistic, 0.0);
  EXPECT_EQ(eq.p_raw, 1.0);
  EXPECT_EQ(eq.effect_value, 0.0);
  ASSERT_OK_AND_ASSIGN(const StatResult ext, ProportionsZTest(10, 10, 0, 10));
  EXPECT_NEAR(std::abs(ext.effect_value), std::numbers::pi, 1e-15);
  EXPECT_FALSE(ProportionsZTest(1, 0, 0, 1).ok());
  EXPECT_FALSE(ProportionsZTest(3, 2, 0, 1).ok());
}

TEST(ProportionsTest, MatchesBinomialSimulation) {
  ASSERT_OK_AND_ASSIGN(const StatResult r, ProportionsZTest(50, 100, 30, 100));
  Rng rng(7);
  std::binomial_distribution<int> bin(100, 0.4);
  int hit = 0;
  const int draws = 1000000;
  for (int i = 0; i < draws; ++i) {
    const int a = bin(rng), b = bin(rng);
    const double pool = (a + b) / 200.0;
    const double se = std::sqrt(pool * (1 - pool) * 0.02);
    const double z = se > 0 ? (a - b) / 100.0 / se : 0.0;
    hit += std::abs(z) >= std::abs(r.statistic) - 1e-12;
  }
  EXPECT_NEAR(r.p_raw, static_cast<double>(hit) / draws, 0.005);
}

TEST(McNemarTest, Examples) {
  ASSERT_OK_AND_ASSIGN(const StatResult sym, McNemarExact(4, 4));
  EXPECT_EQ(sym.p_raw, 1.0);
  ASSERT_OK_AND_ASSIGN(const StatResult r, McNemarExact(5, 0));
  EXPECT_NEAR(r.p_raw, 0.0625, 1e-15);
  EXPECT_EQ(r.effect_value, 0.5);
  EXPECT_EQ(*r.doubled_g, 1.0);
  EXPECT_FALSE(McNemarExact(0, 0).ok());
  EXPECT_FALSE(McNemarExact(-1, 3).ok());
}

TEST(McNemarTest, MatchesSequenceEnumeration) {
  for (int b = 0; b <= 8; ++b) {
    for (int c = 0; c <= 8; ++c) {
      if (b + c == 0) continue;
      const int n = b + c, k = std::min(b, c);
      double tail = 0;
      for (unsigned s = 0; s < (1u << n); ++s) tail += std::popcount(s) <= k;
      ASSERT_OK_AND_ASSIGN(const StatResult r, McNemarExact(b, c));
      EXPECT_NEAR(r.p_raw, std::min(1.0, 2 * tail / (1u << n)), 1e-12);
    }
  }
}

// Sign-flip enumeration with tie-averaged magnitude ranks.
double BruteWilcoxonP(const std::vector<double>& d) {
  const int n = d.size();
  std::vector<double> rank(n);
  for (int i = 0; i < n; ++i) {
    double less = 0, eq = 0;
    for (int j = 0; j < n; ++j) {
      less += std::abs(d[j]) < std::abs(d[i]);
      eq += std::abs(d[j]) == std::abs(d[i]);
    }
    rank[i] = less + (eq + 1) / 2;
  }
  double total = 0, obs = 0;
  for (int i = 0; i < n; ++i) {
    total += rank[i];
    if (d[i] > 0) obs += rank[i];
  }
  double hit = 0;
  for (unsigned s = 0; s < (1u << n); ++s) {
    double w = 0;
    for (int i = 0; i < n; ++i) w += (s >> i) & 1 ? rank[i] : 0;
    hit += std::abs(w - total / 2) >= std::abs(obs - total / 2) - 1e-9;
  }
  return hit / (1u << n);
}

TEST(WilcoxonTest, Examples) {
  ASSERT_OK_AND_ASSIGN(const StatResult pos, WilcoxonSignedRank(Vec{1, 2, 0, 5}));
  EXPECT_EQ(pos.effect_value, 1.0);
  ASSERT_OK_AND_ASSIGN(const StatResult sym, WilcoxonSignedRank(Vec{1, -1}));
  EXPECT_EQ(sym.effect_value, 0.0);
  ASSERT_OK_AND_ASSIGN(const StatResult r, WilcoxonSignedRank(Vec{1, 2, 3, -1}));
  EXPECT_EQ(r.statistic, 8.5);
  EXPECT_NEAR(r.p_raw, BruteWilcoxonP(Vec{1, 2, 3, -1}), 1e-12);
  EXPECT_FALSE(WilcoxonSignedRank(Vec{0, 0}).ok());
}

TEST(WilcoxonTest, ExactMatchesEnumeration) {
  Rng rng(3);
  std::uniform_int_distribution<int> u(-4, 4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> d;
    while (d.size() < static_cast<size_t>(1 + trial % 8)) {
      if (const int v = u(rng); v != 0) d.push_back(v);
    }
    ASSERT_OK_AND_ASSIGN(const StatResult r, WilcoxonSignedRank(d));
    EXPECT_TRUE(r.exact);
    EXPECT_NEAR(r.p_raw, BruteWilcoxonP(d), 1e-12) << "trial " << trial;
  }
}

TEST(WilcoxonTest, NormalApproximationBeyondLimit) {
  std::vector<double> d;
  for (int i = 1; i <= 30; ++i) d.push_back(i % 4 == 0 ? -i : i);
  ASSERT_OK_AND_ASSIGN(const StatResult r, WilcoxonSignedRank(d));
  EXPECT_FALSE(r.exact);
  double wplus = 0;
  for (const double v : d) wplus += v > 0 ? std::abs(v) : 0;
  EXPECT_EQ(r.statistic, wplus);
  const double mean = 30 * 31 / 4.0, sd = std::sqrt(30 * 31 * 61 / 24.0);
  EXPECT_NEAR(r.p_raw, std::erfc((std::abs(wplus - mean) - 0.5) / sd / std::sqrt(2.0)),
              1e-12);
}

TEST(HolmTest, Examples) {
  EXPECT_EQ(*HolmAdjust(std::vector<double>{0.2}), std::vector<double>{0.2});
  const auto adj = *HolmAdjust(std::vector<double>{0.01, 0.04, 0.03});
  EXPECT_NEAR(adj[0], 0.03, 1e-15);
  EXPECT_NEAR(adj[1], 0.06, 1e-15);
  EXPECT_NEAR(adj[2], 0.06, 1e-15);
  EXPECT_EQ(*HolmAdjust(std::vector<double>{1, 1, 1}), (std::vector<double>{1, 1, 1}));
  EXPECT_FALSE(HolmAdjust(std::vector<double>{0.5, 1.5}).ok());
}

TEST(HolmTest, NeverDecreasesAndIdempotent) {
  Rng rng(9);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> p(1 + trial % 12);
    for (double& v : p) v = std::pow(u(rng), 3);
    const auto once = *HolmAdjust(p);
    for (size_t i = 0; i < p.size(); ++i) {
      EXPECT_GE(once[i], p[i]);
      EXPECT_LE(once[i], 1.0);
    }
    std::vector<StatResult> family(p.size());
    for (size_t i = 0; i < p.size(); ++i) family[i].p_raw = p[i];
    ASSERT_OK(ApplyHolm(family));
    ASSERT_OK(ApplyHolm(family));
    for (size_t i = 0; i < p.size(); ++i) EXPECT_EQ(family[i].p_adjusted, once[i]);
  }
}

TEST(HolmTest, AdjustingAdjustedValuesIsNotIdentity) {
  const auto once = *HolmAdjust(std::vector<double>{0.1, 0.2});
  EXPECT_EQ(once, (std::vector<double>{0.2, 0.2}));
  EXPECT_EQ(*HolmAdjust(once), (std::vector<double>{0.4, 0.4}));
}

TEST(EffectSizeTest, Categories) {
  EXPECT_EQ(*EffectSizeCategory(1.0, EffectKind::kCliffsDelta), EffectCategory::kLarge);
  EXPECT_EQ(*EffectSizeCategory(0.0, EffectKind::kCohensH), EffectCategory::kSmall);
  EXPECT_EQ(*EffectSizeCategory(0.20, EffectKind::kCohensG), EffectCategory::kMedium);
  EXPECT_EQ(*EffectSizeCategory(-0.35, EffectKind::kRankBiserial), EffectCategory::kMedium);
  EXPECT_FALSE(EffectSizeCategory(NAN, EffectKind::kCohensH).ok());
  EXPECT_FALSE(EffectSizeCategory(0.1, static_cast<EffectKind>(17)).ok());
}

TEST(FamilyTest, SignificanceFollowsAdjustedP) {
  std::vector<StatResult> family(3);
  family[0].p_raw = 0.01;
  family[1].p_raw = 0.04;
  family[2].p_raw = 0.03;
  ASSERT_OK(ApplyHolm(family));
  EXPECT_TRUE(family[0].significant);
  EXPECT_FALSE(family[1].significant);
  EXPECT_TRUE(Heterogeneous(family));
  family.pop_back();
  family[0].p_raw = 0.2;
  EXPECT_FALSE(Heterogeneous(family));
}

}  // namespace
}  // namespace tabadv
