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
#include <limits>
#include <numeric>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "tabadv/learners/autoencoder.h"
#include "tabadv/learners/mlp.h"
#include "tabadv/learners/surrogate.h"
#include "tabadv/learners/tree.h"
#include "test_util.h"

namespace tabadv {
namespace {

using ::testing::HasSubstr;

// Four XOR cells, jittered.
void XorData(std::vector<Vec>* rows, std::vector<int>* labels) {
  Rng rng(5);
  std::uniform_real_distribution<double> jitter(-0.2, 0.2);
  for (int cell = 0; cell < 4; ++cell) {
    const int a = cell & 1, b = cell >> 1;
    for (int i = 0; i < 25; ++i) {
      rows->push_back({a + jitter(rng), b + jitter(rng)});
      labels->push_back(a ^ b);
    }
  }
}

double Accuracy(const Classifier& m, const std::vector<Vec>& rows,
                std::span<const int> labels) {
  int correct = 0;
  for (size_t i = 0; i < rows.size(); ++i) correct += m.Label(rows[i]) == labels[i];
  return static_cast<double>(correct) / rows.size();
}

void ExpectReachableLeaves(const TreeEnsemble& m) {
  for (const Tree& t : m.trees()) {
    for (const TreeNode& n : t.nodes) {
      EXPECT_GT(n.weight, 0.0);
      EXPECT_TRUE(std::isfinite(n.value));
      if (!n.is_leaf()) {
        ASSERT_GE(n.left, 0);
        ASSERT_GE(n.right, 0);
        EXPECT_DOUBLE_EQ(n.weight,
                         t.nodes[n.left].weight + t.nodes[n.right].weight);
      }
    }
  }
}

TEST(GradientBoostingTest, ZeroEstimatorsIsError) {
  BoostingParams p;
  p.n_estimators = 0;
  const auto m = FitGradientBoosting({{0.0}, {1.0}}, std::vector<int>{0, 1}, p);
  ASSERT_FALSE(m.ok());
  EXPECT_THAT(std::string(m.status().message()), HasSubstr("n_estimators"));
}

TEST(GradientBoostingTest, SingleClassIsError) {
  const auto m = FitGradientBoosting({{0.0}, {1.0}}, std::vector<int>{1, 1},
                                     BoostingParams());
  ASSERT_FALSE(m.ok());
  EXPECT_THAT(std::string(m.status().message()), HasSubstr("single-class"));
}

TEST(GradientBoostingTest, ConstantTreeOnBalancedLabels) {
  BoostingParams p;
  p.n_estimators = 1;
  p.max_depth = 0;
  ASSERT_OK_AND_ASSIGN(
      const TreeEnsemble m,
      FitGradientBoosting({{0.0}, {1.0}, {2.0}, {3.0}},
                          std::vector<int>{0, 1, 0, 1}, p));
  for (double x = -1; x <= 4; x += 0.5) {
    EXPECT_NEAR(m.Proba(std::vector<double>{x}), 0.5, 1e-12);
  }
}

TEST(GradientBoostingTest, XorCells) {
  std::vector<Vec> rows;
  std::vector<int> labels;
  XorData(&rows, &labels);
  BoostingParams p;
  p.n_estimators = 50;
  p.max_depth = 2;
  ASSERT_OK_AND_ASSIGN(const TreeEnsemble m,
                       FitGradientBoosting(rows, labels, p));
  EXPECT_GE(Accuracy(m, rows, labels), 0.95);
  // Brute-force per-cell check over the fitted predictions.
  for (int cell = 0; cell < 4; ++cell) {
    int correct = 0;
    for (int i = 0; i < 25; ++i) {
      correct += m.Label(rows[cell * 25 + i]) == labels[cell * 25 + i];
    }
    EXPECT_GE(correct, 24) << "cell " << cell;
  }
  ExpectReachableLeaves(m);
}

TEST(GradientBoostingTest, StagedLossIsMonotone) {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    const Dataset ds = testing::GaussianBlobs(3, 60, 1.0, seed);
    BoostingParams p;
    p.n_estimators = 40;
    p.max_depth = 3;
    p.learning_rate = seed % 2 == 0 ? 1.0 : 0.3;
    p.seed = seed;
    ASSERT_OK_AND_ASSIGN(const TreeEnsemble full,
                         FitGradientBoosting(ds.rows, ds.labels, p));
    double prev = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k <= full.trees().size(); ++k) {
      const TreeEnsemble staged(
          full.kind(), full.num_features(), full.base_score(),
          full.learning_rate(),
          std::vector<Tree>(full.trees().begin(), full.trees().begin() + k));
      const double loss = LogisticLoss(staged, ds.rows, ds.labels);
      EXPECT_LE(loss, prev + 1e-12) << "stage " << k;
      prev = loss;
    }
  }
}

TEST(GradientBoostingTest, Deterministic) {
  const Dataset ds = testing::GaussianBlobs(4, 40, 1.0, 9);
  BoostingParams p;
  p.n_estimators = 20;
  p.subsample = 0.7;
  p.seed = 17;
  ASSERT_OK_AND_ASSIGN(const TreeEnsemble a,
                       FitGradientBoosting(ds.rows, ds.labels, p));
  ASSERT_OK_AND_ASSIGN(const TreeEnsemble b,
                       FitGradientBoosting(ds.rows, ds.labels, p));
  for (const Vec& r : ds.rows) EXPECT_EQ(a.Margin(r), b.Margin(r));
}

TEST(RandomForestTest, DepthZeroIsMajority) {
  ForestParams p;
  p.n_estimators = 5;
  p.max_depth = 0;
  ASSERT_OK_AND_ASSIGN(
      const TreeEnsemble m,
      FitRandomForest({{0.0}, {1.0}, {2.0}, {3.0}, {4.0}},
                      std::vector<int>{1, 1, 0, 1, 0}, p));
  for (double x = -1; x <= 5; x += 0.5) {
    EXPECT_NEAR(m.Proba(Vec{x}), 0.6, 1e-12);
    EXPECT_EQ(m.Label(Vec{x}), 1);
  }
}

TEST(RandomForestTest, SeparableOneDimensional) {
  // Threshold enumeration oracle: some midpoint separates the classes.
  Rng rng(2);
  std::uniform_real_distribution<double> u(0, 10);
  std::vector<Vec> rows;
  std::vector<int> labels;
  for (int i = 0; i < 60; ++i) {
    const double x = u(rng);
    rows.push_back({x});
    labels.push_back(x > 6.3 ? 1 : 0);
  }
  std::vector<double> xs;
  for (const Vec& r : rows) xs.push_back(r[0]);
  std::sort(xs.begin(), xs.end());
  bool separable = false;
  for (size_t i = 0; i + 1 < xs.size(); ++i) {
    const double t = 0.5 * (xs[i] + xs[i + 1]);
    int correct = 0;
    for (size_t k = 0; k < rows.size(); ++k) {
      correct += (rows[k][0] > t ? 1 : 0) == labels[k];
    }
    separable |= correct == static_cast<int>(rows.size());
  }
  ASSERT_TRUE(separable);
  ForestParams p;
  p.n_estimators = 10;
  p.max_depth = 1;
  ASSERT_OK_AND_ASSIGN(const TreeEnsemble m, FitRandomForest(rows, labels, p));
  EXPECT_EQ(Accuracy(m, rows, labels), 1.0);
  ExpectReachableLeaves(m);
}

TEST(RandomForestTest, SameSeedSameTrees) {
  const Dataset ds = testing::GaussianBlobs(5, 30, 1.0, 4);
  ForestParams p;
  p.n_estimators = 8;
  p.bootstrap = true;
  p.seed = 21;
  ASSERT_OK_AND_ASSIGN(const TreeEnsemble a, FitRandomForest(ds.rows, ds.labels, p));
  ASSERT_OK_AND_ASSIGN(const TreeEnsemble b, FitRandomForest(ds.rows, ds.labels, p));
  ASSERT_EQ(a.trees().size(), b.trees().size());
  for (size_t t = 0; t < a.trees().size(); ++t) {
    const auto& na = a.trees()[t].nodes;
    const auto& nb = b.trees()[t].nodes;
    ASSERT_EQ(na.size(), nb.size());
    for (size_t k = 0; k < na.size(); ++k) {
      EXPECT_EQ(na[k].feature, nb[k].feature);
      EXPECT_EQ(na[k].threshold, nb[k].threshold);
      EXPECT_EQ(na[k].value, nb[k].value);
    }
  }
}

TEST(RegressionGbmTest, ConstantTarget) {
  const Dataset ds = testing::GaussianBlobs(2, 20, 1.0, 0);
  const Vec target(ds.size(), 3.25);
  BoostingParams p;
  p.n_estimators = 10;
  ASSERT_OK_AND_ASSIGN(const TreeEnsemble m, FitRegressionGbm(ds.rows, target, p));
  for (const Vec& r : ds.rows) EXPECT_DOUBLE_EQ(m.Value(r), 3.25);
}

TEST(RegressionGbmTest, CopyOfFeature) {
  const Dataset ds = testing::GaussianBlobs(3, 100, 0.5, 8);
  const Vec target = ds.Column(1);
  BoostingParams p;
  p.n_estimators = 200;
  p.max_depth = 6;
  p.learning_rate = 0.1;
  ASSERT_OK_AND_ASSIGN(const TreeEnsemble m, FitRegressionGbm(ds.rows, target, p));
  const double mean =
      std::accumulate(target.begin(), target.end(), 0.0) / target.size();
  double ss_res = 0, ss_tot = 0;
  for (size_t i = 0; i < ds.size(); ++i) {
    ss_res += std::pow(m.Value(ds.rows[i]) - target[i], 2);
    ss_tot += std::pow(target[i] - mean, 2);
  }
  EXPECT_GE(1.0 - ss_res / ss_tot, 0.99);
  EXPECT_DOUBLE_EQ(m.base_score(), mean);
}

TEST(RegressionGbmTest, Errors) {
  BoostingParams p;
  EXPECT_FALSE(FitRegressionGbm({}, Vec{}, p).ok());
  p.n_estimators = 0;
  EXPECT_FALSE(FitRegressionGbm({{1.0}}, Vec{1.0}, p).ok());
  EXPECT_FALSE(FitRegressionGbm({{1.0}, {2.0}},
                                Vec{1.0, std::nan("")}, BoostingParams())
                   .ok());
}

TEST(PredictTest, TrivialEnsembles) {
  const TreeEnsemble empty_gb(EnsembleKind::kGradientBoosting, 2, 0.7, 0.1, {});
  EXPECT_DOUBLE_EQ(empty_gb.Proba(Vec{0, 0}), Sigmoid(0.7));

  Tree leaf;
  leaf.nodes.push_back(TreeNode{-1, 0, -1, -1, 0.9, 1.0});
  const TreeEnsemble forest(EnsembleKind::kRandomForest, 2, 0.0, 1.0, {leaf});
  EXPECT_DOUBLE_EQ(forest.Proba(Vec{3, 4}), 0.9);

  EXPECT_FALSE(forest.PredictProba(Vec{1.0}).ok());
  EXPECT_THAT(std::string(forest.Predict(Vec{1, 2, 3}).status().message()),
              HasSubstr("dimension mismatch"));
}

SurrogateArch SmallArch() {
  SurrogateArch arch;
  arch.embed_hidden = {8};
  arch.head_width = 6;
  return arch;
}

void ZeroParameters(SurrogateModel* m) {
  for (Mlp* net : {&m->mutable_embed(), &m->mutable_head()}) {
    for (auto span : net->Parameters()) std::fill(span.begin(), span.end(), 0.0);
  }
}

TEST(SurrogateTest, ZeroParameters) {
  ASSERT_OK_AND_ASSIGN(SurrogateModel m, SurrogateModel::Create(3, SmallArch(), 1));
  ZeroParameters(&m);
  const Vec x = {1.0, -2.0, 0.5};
  EXPECT_DOUBLE_EQ(m.Proba(x), 0.5);
  EXPECT_EQ(m.Label(x), 1);
  ASSERT_OK_AND_ASSIGN(const Vec e, m.ForwardEmbed(x));
  EXPECT_EQ(e, Vec(16, 0.0));
}

TEST(SurrogateTest, EmbeddingWidthAndDeterminism) {
  SurrogateArch bad = SmallArch();
  bad.embedding_width = 8;
  const auto m = SurrogateModel::Create(3, bad, 0);
  ASSERT_FALSE(m.ok());
  EXPECT_THAT(std::string(m.status().message()), HasSubstr("16"));

  ASSERT_OK_AND_ASSIGN(const SurrogateModel ok,
                       SurrogateModel::Create(3, SmallArch(), 0));
  const Vec x = {0.3, 0.1, -0.7};
  EXPECT_EQ(ok.Embed(x), ok.Embed(Vec(x)));
  EXPECT_EQ(ok.Embed(x).size(), 16u);
  EXPECT_FALSE(ok.ForwardEmbed(Vec{1.0}).ok());
}

TEST(SurrogateTest, TrainsOnSeparableData) {
  const Dataset ds = testing::GaussianBlobs(2, 100, 4.0, 3);
  TrainConfig cfg;
  cfg.seed = 3;
  TrainReport report;
  ASSERT_OK_AND_ASSIGN(const SurrogateModel m,
                       TrainSurrogate(ds.rows, ds.labels, SmallArch(), cfg, &report));
  EXPECT_GE(Accuracy(m, ds.rows, ds.labels), 0.9);
  EXPECT_LE(report.epochs_run, 70);
}

TEST(SurrogateTest, PatienceZeroStopsAfterFirstNonImprovingEpoch) {
  const Dataset ds = testing::GaussianBlobs(2, 60, 1.0, 6);
  TrainConfig cfg;
  cfg.patience = 0;
  cfg.epochs = 70;
  cfg.seed = 1;
  TrainReport report;
  ASSERT_OK(TrainSurrogate(ds.rows, ds.labels, SmallArch(), cfg, &report));
  // Every epoch up to the stopping one improved, so the last is the only
  // non-improving epoch (or the budget ran out).
  EXPECT_TRUE(report.epochs_run == report.best_epoch + 1 ||
              report.epochs_run == cfg.epochs);
  cfg.patience = 2;
  ASSERT_OK(TrainSurrogate(ds.rows, ds.labels, SmallArch(), cfg, &report));
  EXPECT_LE(report.epochs_run, report.best_epoch + 3);
}

TEST(SurrogateTest, EmptyTrainingSet) {
  const auto m = TrainSurrogate({}, std::vector<int>{}, SmallArch(), TrainConfig());
  ASSERT_FALSE(m.ok());
  EXPECT_THAT(std::string(m.status().message()), HasSubstr("empty"));
}

TEST(SurrogateTest, DeterministicTraining) {
  const Dataset ds = testing::GaussianBlobs(3, 40, 1.5, 2);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.seed = 99;
  ASSERT_OK_AND_ASSIGN(const SurrogateModel a,
                       TrainSurrogate(ds.rows, ds.labels, SmallArch(), cfg));
  ASSERT_OK_AND_ASSIGN(const SurrogateModel b,
                       TrainSurrogate(ds.rows, ds.labels, SmallArch(), cfg));
  for (const Vec& r : ds.rows) EXPECT_EQ(a.Logit(r), b.Logit(r));
}

TEST(GradInputTest, AlphaZeroIsNegativeBceGradient) {
  ASSERT_OK_AND_ASSIGN(const SurrogateModel m,
                       SurrogateModel::Create(3, SmallArch(), 4));
  const Vec x = {0.2, -0.4, 1.0};
  const Vec x_adv = {0.5, 0.1, 0.9};
  ASSERT_OK_AND_ASSIGN(const Vec g0, m.GradInput(x_adv, x, 1, 0.0));
  ASSERT_OK_AND_ASSIGN(const Vec g0_other_x, m.GradInput(x_adv, x_adv, 1, 0.0));
  EXPECT_EQ(g0, g0_other_x);
  // d(-BCE)/dlogit = y - p for y = 1.
  const double p = m.Proba(x_adv);
  const double h = 1e-6;
  for (int j = 0; j < 3; ++j) {
    Vec up = x_adv, dn = x_adv;
    up[j] += h;
    dn[j] -= h;
    const double dlogit = (m.Logit(up) - m.Logit(dn)) / (2 * h);
    EXPECT_NEAR(g0[j], (1.0 - p) * dlogit, 1e-6);
  }
}

TEST(GradInputTest, DistanceTermVanishesAtOrigin) {
  ASSERT_OK_AND_ASSIGN(const SurrogateModel m,
                       SurrogateModel::Create(3, SmallArch(), 4));
  const Vec x = {0.2, -0.4, 1.0};
  ASSERT_OK_AND_ASSIGN(const Vec a, m.GradInput(x, x, 0, 0.0));
  ASSERT_OK_AND_ASSIGN(const Vec b, m.GradInput(x, x, 0, 5.0));
  EXPECT_EQ(a, b);
}

TEST(GradInputTest, MatchesFiniteDifferences) {
  Rng rng(123);
  std::normal_distribution<double> n01(0, 1);
  std::uniform_int_distribution<int> act(0, 2);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 2 + trial % 4;
    SurrogateArch arch = SmallArch();
    arch.activation = static_cast<Activation>(act(rng));
    ASSERT_OK_AND_ASSIGN(SurrogateModel m, SurrogateModel::Create(d, arch, trial));
    Vec x(d), x_adv(d);
    for (int j = 0; j < d; ++j) {
      x[j] = n01(rng);
      x_adv[j] = x[j] + n01(rng);
    }
    const int y = trial % 2;
    const double alpha = 0.5 + (trial % 3);
    ASSERT_OK_AND_ASSIGN(const Vec g, m.GradInput(x_adv, x, y, alpha));
    const double h = 1e-5;
    Vec fd(d);
    for (int j = 0; j < d; ++j) {
      Vec up = x_adv, dn = x_adv;
      up[j] += h;
      dn[j] -= h;
      fd[j] = (*m.AdvLoss(up, x, y, alpha) - *m.AdvLoss(dn, x, y, alpha)) /
              (2 * h);
    }
    Vec diff(d);
    for (int j = 0; j < d; ++j) diff[j] = g[j] - fd[j];
    const double rel = Norm2(diff) / std::max({Norm2(g), Norm2(fd), 1e-8});
    worst = std::max(worst, rel);
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(AutoencoderTest, ReconstructionErrorArithmetic) {
  EXPECT_DOUBLE_EQ(MeanSquaredDeviation(Vec{0, 0}, Vec{1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(MeanSquaredDeviation(Vec{1, 2, 3}, Vec{1, 2, 3}), 0.0);
}

TEST(AutoencoderTest, IdentityNetHasZeroError) {
  DenseLayer layer;
  layer.in = layer.out = 3;
  layer.weights = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  layer.bias = {0, 0, 0};
  const AeNet ae(Standardizer::Identity(3), Mlp({layer}));
  EXPECT_DOUBLE_EQ(ae.ReconstructionError(Vec{0.5, -2.0, 7.0}), 0.0);
}

TEST(AutoencoderTest, RepeatedPointVersusFarPoint) {
  std::vector<Vec> rows(50, Vec{1.0, 2.0, 3.0});
  ASSERT_OK_AND_ASSIGN(const AeNet ae,
                       FitAutoencoder(rows, AutoencoderTrainConfig(1)));
  EXPECT_LT(ae.ReconstructionError(rows[0]),
            ae.ReconstructionError(Vec{11.0, 12.0, 13.0}));
}

TEST(AutoencoderTest, TrainedOnBlobSeparatesOutliers) {
  const Dataset ds = testing::GaussianBlobs(4, 200, 0.0, 12);
  ASSERT_OK_AND_ASSIGN(const AeNet ae,
                       FitAutoencoder(ds.rows, AutoencoderTrainConfig(2)));
  EXPECT_EQ(ae.width(), 4);
  double inlier = 0;
  for (const Vec& r : ds.rows) inlier += ae.ReconstructionError(r) / ds.size();
  EXPECT_LT(inlier, ae.ReconstructionError(Vec{10, -10, 10, -10}));
}

TEST(AutoencoderTest, Errors) {
  EXPECT_FALSE(FitAutoencoder({}, AutoencoderTrainConfig()).ok());
  EXPECT_FALSE(FitAutoencoder({{1.0}}, AutoencoderTrainConfig()).ok());
}

}  // namespace
}  // namespace tabadv
