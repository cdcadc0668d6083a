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
#include <cmath>
#include <functional>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "tabadv/csad/cost_model.h"
#include "tabadv/csad/detectors.h"
#include "tabadv/csad/isolation_forest.h"
#include "test_util.h"

namespace tabadv {
namespace {

using ::testing::HasSubstr;

std::vector<Vec> Cluster(int d, size_t n, double center, uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> n01(0, 1);
  std::vector<Vec> rows(n, Vec(d));
  for (Vec& r : rows) {
    for (double& v : r) v = center + n01(rng);
  }
  return rows;
}

TEST(IsolationForestTest, AveragePathLength) {
  EXPECT_EQ(AveragePathLength(1), 0.0);
  EXPECT_DOUBLE_EQ(AveragePathLength(2), 1.0);
  // Exact rational evaluation of 2 H(255) - 2 * 255 / 256.
  EXPECT_NEAR(AveragePathLength(256), 10.248689925634562, 1e-12);
}

TEST(IsolationForestTest, ScoreHalfAtNormalizer) {
  IsoTree leaf;
  leaf.nodes.push_back(IsoNode{-1, 0, -1, -1, 64});
  const IsolationForest f(64, {leaf, leaf});
  EXPECT_DOUBLE_EQ(f.Score(Vec{0.0}), 0.5);
}

TEST(IsolationForestTest, FarPointScoresHigher) {
  int passes = 0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const std::vector<Vec> rows = Cluster(3, 300, 0.0, seed);
    IsolationForestParams p;
    p.seed = seed;
    ASSERT_OK_AND_ASSIGN(const IsolationForest f, FitIsolationForest(rows, p));
    Vec scores;
    for (const Vec& r : rows) scores.push_back(f.Score(r));
    std::nth_element(scores.begin(), scores.begin() + scores.size() / 2,
                     scores.end());
    passes += f.Score(Vec{10, 10, 10}) > scores[scores.size() / 2];
  }
  EXPECT_GE(passes, 19);
}

TEST(IsolationForestTest, StructureAndBounds) {
  const std::vector<Vec> rows = Cluster(4, 500, 0.0, 1);
  IsolationForestParams p;
  p.n_trees = 30;
  ASSERT_OK_AND_ASSIGN(const IsolationForest f, FitIsolationForest(rows, p));
  EXPECT_EQ(f.psi(), 256);
  EXPECT_EQ(f.trees().size(), 30u);
  for (const IsoTree& t : f.trees()) {
    EXPECT_LE(t.Height(), 8);
    EXPECT_EQ(t.nodes[0].size, 256);
  }
  Rng rng(3);
  std::normal_distribution<double> wide(0, 50);
  for (int i = 0; i < 1000; ++i) {
    const Vec x = {wide(rng), wide(rng), wide(rng), wide(rng)};
    const double s = f.Score(x);
    EXPECT_GT(s, 0.0);
    EXPECT_LT(s, 1.0);
  }
  // Score decreases as the mean path length grows.
  EXPECT_GT(f.Score(Vec{30, 30, 30, 30}), f.Score(Vec{0, 0, 0, 0}));
}

TEST(IsolationForestTest, Errors) {
  EXPECT_FALSE(FitIsolationForest({{1.0}}, {}).ok());
  IsolationForestParams p;
  p.psi = 1;
  EXPECT_FALSE(FitIsolationForest(Cluster(1, 10, 0, 0), p).ok());
}

TEST(AeThresholdTest, Examples) {
  EXPECT_NEAR(*AeThreshold(Vec{0.1, 0.1, 0.1}), 0.1, 1e-15);
  EXPECT_DOUBLE_EQ(*AeThreshold(Vec{0.0, 2.0}), 3.0);
  EXPECT_FALSE(AeThreshold(Vec{1.0}).ok());
}

TEST(CalibrateIfThresholdTest, Examples) {
  Rng rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  Vec scores(100);
  for (double& s : scores) s = u(rng);
  ASSERT_OK_AND_ASSIGN(const double t0, CalibrateIfThreshold(scores, 0.0));
  EXPECT_GT(t0, *std::max_element(scores.begin(), scores.end()));
  EXPECT_EQ(FlaggedFraction(scores, t0), 0.0);

  ASSERT_OK_AND_ASSIGN(const double t5, CalibrateIfThreshold(scores, 0.05));
  Vec sorted = scores;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  int flagged = 0;
  for (const double s : scores) flagged += s > t5;
  EXPECT_EQ(flagged, 5);
  EXPECT_GT(sorted[4], t5);
  EXPECT_LE(sorted[5], t5);

  EXPECT_FALSE(CalibrateIfThreshold(scores, 1.0).ok());
  EXPECT_FALSE(CalibrateIfThreshold(Vec{}, 0.1).ok());
}

Dataset ShiftedClasses(size_t per_class, uint64_t seed) {
  return testing::GaussianBlobs(3, per_class, 5.0, seed);
}

BankConfig FastBank() {
  BankConfig cfg;
  cfg.ae.epochs = 30;
  cfg.forest.n_trees = 50;
  cfg.seed = 7;
  return cfg;
}

TEST(FitBankTest, DetectorCounts) {
  const Dataset ds = ShiftedClasses(100, 1);
  for (const DetectorKind kind :
       {DetectorKind::kAutoencoder, DetectorKind::kIsolationForest}) {
    ASSERT_OK_AND_ASSIGN(const DetectorBank csad,
                         FitBank(ds, kind, DetectionMode::kCsad, FastBank()));
    EXPECT_EQ(csad.detectors().size(), 2u);
    ASSERT_OK_AND_ASSIGN(const DetectorBank pooled,
                         FitBank(ds, kind, DetectionMode::kStandard, FastBank()));
    EXPECT_EQ(pooled.detectors().size(), 1u);
  }
}

TEST(FitBankTest, UnderPopulatedClass) {
  Dataset ds = ShiftedClasses(50, 2);
  ds.rows.resize(53);
  ds.labels.resize(53);
  const auto bank = FitBank(ds, DetectorKind::kAutoencoder,
                            DetectionMode::kCsad, FastBank());
  ASSERT_FALSE(bank.ok());
  EXPECT_THAT(std::string(bank.status().message()), HasSubstr("class 1"));
}

TEST(FitBankTest, ClassSpecificRouting) {
  const Dataset ds = ShiftedClasses(200, 3);
  const Vec class0_typical = {0, 0, 0};
  for (const DetectorKind kind :
       {DetectorKind::kAutoencoder, DetectorKind::kIsolationForest}) {
    ASSERT_OK_AND_ASSIGN(const DetectorBank bank,
                         FitBank(ds, kind, DetectionMode::kCsad, FastBank()));
    EXPECT_TRUE(*bank.IsAnomalous(class0_typical, 1)) << DetectorKindName(kind);
    EXPECT_FALSE(*bank.IsAnomalous(class0_typical, 0)) << DetectorKindName(kind);
    EXPECT_FALSE(bank.IsAnomalous(class0_typical, 2).ok());
  }
}

TEST(FitBankTest, ThresholdReproducibleFromStoredErrors) {
  const Dataset ds = ShiftedClasses(100, 4);
  ASSERT_OK_AND_ASSIGN(const DetectorBank bank,
                       FitBank(ds, DetectorKind::kAutoencoder,
                               DetectionMode::kCsad, FastBank()));
  for (const Detector& d : bank.detectors()) {
    const double n = d.validation_scores.size();
    double mean = 0, var = 0;
    for (const double e : d.validation_scores) mean += e / n;
    for (const double e : d.validation_scores) var += (e - mean) * (e - mean) / n;
    EXPECT_NEAR(d.threshold, mean + 2 * std::sqrt(var), 1e-12);
    EXPECT_EQ(n, 20);
  }
}

TEST(FitBankTest, CalibrationParityWithAe) {
  for (uint64_t seed = 0; seed < 4; ++seed) {
    const Dataset ds = ShiftedClasses(150, 10 + seed);
    BankConfig cfg = FastBank();
    cfg.seed = seed;
    ASSERT_OK_AND_ASSIGN(const DetectorBank ae,
                         FitBank(ds, DetectorKind::kAutoencoder,
                                 DetectionMode::kCsad, cfg));
    cfg.if_target_fpr = ae.ValidationFprs();
    ASSERT_OK_AND_ASSIGN(const DetectorBank iforest,
                         FitBank(ds, DetectorKind::kIsolationForest,
                                 DetectionMode::kCsad, cfg));
    for (size_t c = 0; c < 2; ++c) {
      const double n = iforest.detectors()[c].validation_scores.size();
      EXPECT_EQ(ae.detectors()[c].validation_scores.size(), n);
      EXPECT_LE(std::abs(iforest.detectors()[c].validation_fpr -
                         ae.detectors()[c].validation_fpr),
                1.0 / n + 1e-12);
    }
  }
}

TEST(DetectionRateTest, OwnTrainingRowsNearCalibratedFpr) {
  const Dataset ds = ShiftedClasses(200, 5);
  ASSERT_OK_AND_ASSIGN(const DetectorBank bank,
                       FitBank(ds, DetectorKind::kAutoencoder,
                               DetectionMode::kCsad, FastBank()));
  for (int c = 0; c < 2; ++c) {
    const std::vector<Vec> rows = ds.RowsOfClass(c);
    const std::vector<int> classes(rows.size(), c);
    ASSERT_OK_AND_ASSIGN(const double rate, bank.DetectionRate(rows, classes));
    EXPECT_LE(rate, bank.detectors()[c].validation_fpr + 0.02);
  }
}

TEST(DetectionRateTest, EdgeCases) {
  const Dataset ds = ShiftedClasses(60, 6);
  ASSERT_OK_AND_ASSIGN(const DetectorBank bank,
                       FitBank(ds, DetectorKind::kIsolationForest,
                               DetectionMode::kStandard, FastBank()));
  EXPECT_FALSE(bank.DetectionRate({}, std::vector<int>{}).ok());
  const std::vector<Vec> far(5, Vec{100, -100, 100});
  ASSERT_OK_AND_ASSIGN(const double rate,
                       bank.DetectionRate(far, std::vector<int>(5, 1)));
  EXPECT_EQ(rate, 1.0);
}

TEST(CostRatioTest, TableValues) {
  EXPECT_NEAR(*CsadCostRatio(Vec{25000, 25000, 25000, 25000}, 2.0), 0.25, 1e-12);
  EXPECT_NEAR(*CsadCostRatio(Vec{25000, 25000, 25000, 25000}, 1.1),
              0.8705505632961241, 1e-12);
  EXPECT_NEAR(*CsadCostRatio(Vec{25000, 25000, 25000, 25000}, 1.0), 1.0, 1e-12);
  EXPECT_NEAR(*CsadCostRatio(Vec{97000, 1000, 1000, 1000}, 2.0), 0.9412, 1e-12);
  EXPECT_NEAR(*CsadCostRatio(Vec{97000, 1000, 1000, 1000}, 1.1),
              0.9859786722954427, 1e-12);
  EXPECT_NEAR(*CsadCostRatio(Vec{5, 900, 17}, 1.0), 1.0, 1e-12);
  EXPECT_FALSE(CsadCostRatio(Vec{0, 0}, 2.0).ok());
  EXPECT_FALSE(CsadCostRatio(Vec{-1, 3}, 2.0).ok());
}

TEST(CostRatioTest, BalancedEqualsPowerLaw) {
  Rng rng(9);
  std::uniform_int_distribution<int> k_dist(1, 20);
  std::uniform_real_distribution<double> a_dist(0.2, 4.0);
  for (int trial = 0; trial < 500; ++trial) {
    const int k = k_dist(rng);
    const double alpha = a_dist(rng);
    const Vec counts(k, 1000.0);
    EXPECT_NEAR(*CsadCostRatio(counts, alpha), std::pow(k, 1.0 - alpha), 1e-12);
  }
}

TEST(CostRatioTest, BalancedMinimizesForSuperLinear) {
  Rng rng(10);
  std::uniform_int_distribution<int> k_dist(2, 8);
  std::uniform_real_distribution<double> a_dist(1.01, 3.0);
  for (int trial = 0; trial < 500; ++trial) {
    const int k = k_dist(rng);
    const double alpha = a_dist(rng);
    const double n = 1200.0 * k;
    Vec counts(k);
    std::uniform_real_distribution<double> w(0.01, 1.0);
    double total = 0;
    for (double& c : counts) total += (c = w(rng));
    for (double& c : counts) c = c / total * n;
    EXPECT_LE(*CsadCostRatio(Vec(k, n / k), alpha),
              *CsadCostRatio(counts, alpha) + 1e-12);
  }
}

}  // namespace
}  // namespace tabadv
