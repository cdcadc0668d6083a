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

#include <cmath>
#include <random>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "tabadv/learners/tree.h"
#include "tabadv/shap/tree_shap.h"
#include "test_util.h"

namespace tabadv {
namespace {

using ::testing::HasSubstr;

TreeNode Leaf(double value, double weight) {
  TreeNode n;
  n.value = value;
  n.weight = weight;
  return n;
}

TreeNode Split(int feature, double threshold, int left, int right,
               double weight) {
  TreeNode n;
  n.feature = feature;
  n.threshold = threshold;
  n.left = left;
  n.right = right;
  n.weight = weight;
  return n;
}

TreeEnsemble Single(const Tree& t, int d) {
  return TreeEnsemble(EnsembleKind::kRegression, d, 0.0, 1.0, {t});
}

// Random tree grown to at most `max_leaves` leaves with consistent weights.
Tree RandomTree(int d, int max_leaves, Rng& rng) {
  std::uniform_int_distribution<int> feat(0, d - 1);
  std::uniform_real_distribution<double> u(0, 1);
  Tree t;
  t.nodes.push_back(Leaf(u(rng), 0));
  std::vector<int> leaves = {0};
  const int target = std::uniform_int_distribution<int>(1, max_leaves)(rng);
  while (static_cast<int>(leaves.size()) < target) {
    const size_t pick =
        std::uniform_int_distribution<size_t>(0, leaves.size() - 1)(rng);
    const int n = leaves[pick];
    leaves.erase(leaves.begin() + pick);
    const int l = static_cast<int>(t.nodes.size());
    t.nodes.push_back(Leaf(4 * u(rng) - 2, 0));
    t.nodes.push_back(Leaf(4 * u(rng) - 2, 0));
    t.nodes[n].feature = feat(rng);
    t.nodes[n].threshold = u(rng);
    t.nodes[n].left = l;
    t.nodes[n].right = l + 1;
    leaves.push_back(l);
    leaves.push_back(l + 1);
  }
  for (const int leaf : leaves) t.nodes[leaf].weight = 1 + std::floor(50 * u(rng));
  // Children have larger indices than parents, so sum in reverse.
  for (int i = static_cast<int>(t.nodes.size()) - 1; i >= 0; --i) {
    TreeNode& n = t.nodes[i];
    if (!n.is_leaf()) n.weight = t.nodes[n.left].weight + t.nodes[n.right].weight;
  }
  return t;
}

TEST(TreeShapTest, SingleLeaf) {
  Tree t;
  t.nodes.push_back(Leaf(3.5, 10));
  ASSERT_OK_AND_ASSIGN(const ShapExplanation ex, TreeShap(Single(t, 3), Vec{1, 2, 3}));
  EXPECT_EQ(ex.attributions, Vec(3, 0.0));
  EXPECT_DOUBLE_EQ(ex.base_value, 3.5);
}

TEST(TreeShapTest, DepthOneStump) {
  const double a = 2.0, b = -1.0, wl = 30, wr = 10;
  Tree t;
  t.nodes = {Split(0, 0.5, 1, 2, wl + wr), Leaf(a, wl), Leaf(b, wr)};
  ASSERT_OK_AND_ASSIGN(const ShapExplanation ex, TreeShap(Single(t, 2), Vec{0.0, 9.0}));
  EXPECT_NEAR(ex.attributions[0], a - (wl * a + wr * b) / (wl + wr), 1e-12);
  EXPECT_EQ(ex.attributions[1], 0.0);
  ASSERT_OK_AND_ASSIGN(const ShapExplanation bf,
                       ShapBruteForce(Single(t, 2), Vec{0.0, 9.0}));
  EXPECT_NEAR(bf.attributions[0], ex.attributions[0], 1e-12);
}

TEST(TreeShapTest, MatchesBruteForceOnRandomEnsembles) {
  Rng rng(42);
  std::uniform_real_distribution<double> u(-0.2, 1.2);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + trial % 12;
    const int n_trees = 1 + trial % 4;
    std::vector<Tree> trees;
    for (int k = 0; k < n_trees; ++k) trees.push_back(RandomTree(d, 64, rng));
    const EnsembleKind kind = static_cast<EnsembleKind>(trial % 3);
    const TreeEnsemble e(kind, d, 0.3, 0.7, trees);
    Vec x(d);
    for (double& v : x) v = u(rng);
    ASSERT_OK_AND_ASSIGN(const ShapExplanation fast, TreeShap(e, x));
    ASSERT_OK_AND_ASSIGN(const ShapExplanation slow, ShapBruteForce(e, x));
    EXPECT_NEAR(fast.base_value, slow.base_value, 1e-9);
    double sum = fast.base_value;
    for (int j = 0; j < d; ++j) {
      EXPECT_NEAR(fast.attributions[j], slow.attributions[j], 1e-9)
          << "trial " << trial << " feature " << j;
      sum += fast.attributions[j];
    }
    EXPECT_NEAR(sum, e.Margin(x), 1e-9);
  }
}

TEST(TreeShapTest, LocalAccuracyOnFittedModels) {
  const Dataset ds = testing::GaussianBlobs(6, 80, 1.0, 3);
  BoostingParams bp;
  bp.n_estimators = 30;
  bp.max_depth = 4;
  ForestParams fp;
  fp.n_estimators = 20;
  fp.max_depth = 6;
  ASSERT_OK_AND_ASSIGN(const TreeEnsemble gb, FitGradientBoosting(ds.rows, ds.labels, bp));
  ASSERT_OK_AND_ASSIGN(const TreeEnsemble rf, FitRandomForest(ds.rows, ds.labels, fp));
  ASSERT_OK_AND_ASSIGN(const TreeEnsemble reg, FitRegressionGbm(ds.rows, ds.Column(0), bp));
  for (const TreeEnsemble* e : {&gb, &rf, &reg}) {
    for (const Vec& r : ds.rows) {
      ASSERT_OK_AND_ASSIGN(const ShapExplanation ex, TreeShap(*e, r));
      double sum = ex.base_value;
      for (const double v : ex.attributions) sum += v;
      EXPECT_NEAR(sum, e->Margin(r), 1e-9);
    }
  }
}

TEST(TreeShapTest, SymmetryAndDummy) {
  // AND of x0 > 0.5 and x1 > 0.5 with balanced weights; feature 2 unused.
  Tree t;
  t.nodes = {Split(0, 0.5, 1, 2, 40),   Split(1, 0.5, 3, 4, 20),
             Split(1, 0.5, 5, 6, 20),   Leaf(0, 10),
             Leaf(0, 10),               Leaf(0, 10),
             Leaf(1, 10)};
  const TreeEnsemble e = Single(t, 3);
  for (const Vec& x : {Vec{1, 1, 5}, Vec{0, 0, -5}}) {
    ASSERT_OK_AND_ASSIGN(const ShapExplanation ex, TreeShap(e, x));
    EXPECT_NEAR(ex.attributions[0], ex.attributions[1], 1e-12);
    EXPECT_EQ(ex.attributions[2], 0.0);
  }
}

TEST(TreeShapTest, Errors) {
  Tree t;
  t.nodes = {Split(0, 0.5, 1, 2, 2), Leaf(1, 1), Leaf(0, 0)};
  const auto ex = TreeShap(Single(t, 1), Vec{0.0});
  ASSERT_FALSE(ex.ok());
  EXPECT_THAT(std::string(ex.status().message()), HasSubstr("weightless"));

  Tree leaf;
  leaf.nodes.push_back(Leaf(1, 1));
  const auto wide = ShapBruteForce(Single(leaf, 13), Vec(13, 0.0));
  ASSERT_FALSE(wide.ok());
  EXPECT_THAT(std::string(wide.status().message()), HasSubstr("too many features"));
  ASSERT_OK_AND_ASSIGN(const ShapExplanation zeros,
                       ShapBruteForce(Single(leaf, 12), Vec(12, 0.0)));
  EXPECT_EQ(zeros.attributions, Vec(12, 0.0));
  EXPECT_FALSE(TreeShap(Single(leaf, 2), Vec{1.0}).ok());
}

TEST(MeanAbsShapTest, DominantFeatureRanksFirst) {
  Tree t;
  t.nodes = {Split(3, 0.0, 1, 2, 20), Leaf(-1, 10), Leaf(1, 10)};
  const TreeEnsemble e = Single(t, 5);
  const Dataset ds = testing::GaussianBlobs(5, 30, 0.0, 1);
  ASSERT_OK_AND_ASSIGN(const Vec imp, MeanAbsShap(e, ds.rows));
  EXPECT_EQ(std::max_element(imp.begin(), imp.end()) - imp.begin(), 3);
}

TEST(RangeTableTest, PointRangesAndMonotonicity) {
  const std::vector<Vec> phi = {{1, 2}, {-1, 0}};
  const std::vector<int> cls = {0, 1};
  ASSERT_OK_AND_ASSIGN(const ShapRangeTable t,
                       BuildRangeTable(phi, cls, 2, DetectionMode::kCsad));
  EXPECT_EQ(t.lo, t.hi);
  EXPECT_EQ(t.lo[0], (Vec{1, 2}));

  Rng rng(2);
  std::normal_distribution<double> n01(0, 1);
  std::vector<Vec> grow;
  std::vector<int> grow_cls;
  ShapRangeTable prev;
  for (int i = 0; i < 50; ++i) {
    grow.push_back({n01(rng), n01(rng), n01(rng)});
    grow_cls.push_back(i % 2);
    if (i < 2) continue;
    ASSERT_OK_AND_ASSIGN(ShapRangeTable cur,
                         BuildRangeTable(grow, grow_cls, 2, DetectionMode::kCsad));
    ASSERT_OK_AND_ASSIGN(const ShapRangeTable pooled,
                         BuildRangeTable(grow, grow_cls, 2, DetectionMode::kStandard));
    for (int c = 0; c < 2; ++c) {
      for (int j = 0; j < 3; ++j) {
        EXPECT_LE(cur.lo[c][j], cur.hi[c][j]);
        EXPECT_GE(cur.lo[c][j], pooled.lo[0][j]);
        EXPECT_LE(cur.hi[c][j], pooled.hi[0][j]);
        if (i > 2) {
          EXPECT_LE(cur.lo[c][j], prev.lo[c][j]);
          EXPECT_GE(cur.hi[c][j], prev.hi[c][j]);
        }
      }
    }
    prev = std::move(cur);
  }
}

TEST(RangeTableTest, EmptyClassIsError) {
  const std::vector<Vec> phi = {{1, 2}, {3, 4}};
  EXPECT_FALSE(BuildRangeTable(phi, std::vector<int>{0, 0}, 2,
                               DetectionMode::kCsad).ok());
  EXPECT_OK(BuildRangeTable(phi, std::vector<int>{0, 0}, 2,
                            DetectionMode::kStandard));
}

TEST(ImportanceAnomalyTest, BenignRowsSelfReportZero) {
  const Dataset ds = testing::GaussianBlobs(4, 50, 1.5, 6);
  BoostingParams bp;
  bp.n_estimators = 15;
  ASSERT_OK_AND_ASSIGN(const TreeEnsemble gb, FitGradientBoosting(ds.rows, ds.labels, bp));
  std::vector<Vec> phi;
  std::vector<int> pred;
  for (const Vec& r : ds.rows) {
    phi.push_back(TreeShap(gb, r)->attributions);
    pred.push_back(gb.Label(r));
  }
  for (const DetectionMode mode : {DetectionMode::kCsad, DetectionMode::kStandard}) {
    ASSERT_OK_AND_ASSIGN(const ShapRangeTable t, BuildRangeTable(phi, pred, 2, mode));
    ASSERT_OK_AND_ASSIGN(const ImportanceAnomalyReport rep,
                         ImportanceAnomaly(t, phi, pred));
    EXPECT_EQ(rep.rate, 0.0);
    EXPECT_EQ(rep.avg_count, 0.0);
  }
}

TEST(ImportanceAnomalyTest, JustAboveMax) {
  const std::vector<Vec> phi = {{0, 0}, {1, 1}};
  ASSERT_OK_AND_ASSIGN(const ShapRangeTable t,
                       BuildRangeTable(phi, std::vector<int>{0, 0}, 1,
                                       DetectionMode::kCsad));
  ASSERT_OK_AND_ASSIGN(const ImportanceAnomalyReport rep,
                       ImportanceAnomaly(t, {{1 + 1e-9, 0.5}}, std::vector<int>{0}));
  EXPECT_EQ(rep.rate, 1.0);
  EXPECT_EQ(rep.avg_count, 1.0);
  EXPECT_FALSE(ImportanceAnomaly(t, {}, std::vector<int>{}).ok());
}

TEST(ImportanceAnomalyTest, CsadCatchesCrossClassSamples) {
  // Class 0 ranges near -1, class 1 ranges near +1; pooled covers both.
  Rng rng(8);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  std::vector<Vec> phi;
  std::vector<int> cls;
  for (int i = 0; i < 100; ++i) {
    const int c = i % 2;
    const double center = c == 0 ? -1.0 : 1.0;
    phi.push_back({center + u(rng), center + u(rng)});
    cls.push_back(c);
  }
  ASSERT_OK_AND_ASSIGN(const ShapRangeTable csad,
                       BuildRangeTable(phi, cls, 2, DetectionMode::kCsad));
  ASSERT_OK_AND_ASSIGN(const ShapRangeTable pooled,
                       BuildRangeTable(phi, cls, 2, DetectionMode::kStandard));
  // Adversarial samples look like class 0 but are predicted as class 1.
  std::vector<Vec> adv;
  for (int i = 0; i < 40; i += 2) adv.push_back(phi[i]);
  const std::vector<int> pred(adv.size(), 1);
  ASSERT_OK_AND_ASSIGN(const auto a, ImportanceAnomaly(csad, adv, pred));
  ASSERT_OK_AND_ASSIGN(const auto b, ImportanceAnomaly(pooled, adv, pred));
  EXPECT_GE(a.rate, b.rate);
  EXPECT_EQ(a.rate, 1.0);
  EXPECT_EQ(b.rate, 0.0);
}

TEST(ShapCsvTest, Format) {
  EXPECT_EQ(ShapCsv({{0.5, -1}}, {"a", "b"}),
            "sample_id,feature,attribution\n0,a,0.5\n0,b,-1\n");
}

}  // namespace
}  // namespace tabadv
