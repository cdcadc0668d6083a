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
#include <set>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "tabadv/attacks/transfer.h"
#include "tabadv/learners/tree.h"
#include "tabadv/shap/tree_shap.h"
#include "test_util.h"

namespace tabadv {
namespace {

using ::testing::ElementsAre;
using ::testing::HasSubstr;
using testing::Continuous;
using testing::MakeSchema;

SurrogateArch TinyArch(Activation act = Activation::kRelu) {
  SurrogateArch arch;
  arch.embed_hidden = {8};
  arch.head_width = 8;
  arch.activation = act;
  return arch;
}

TEST(CorrelationTableTest, PerfectPairAndImmutables) {
  Dataset ds;
  ds.schema = MakeSchema({Continuous("f0", -100, 100), Continuous("f1", -100, 100),
                          Continuous("f2", -100, 100),
                          Continuous("f3", -100, 100, /*editable=*/false)});
  Rng rng(1);
  std::normal_distribution<double> n01(0, 1);
  for (int i = 0; i < 100; ++i) {
    const double a = n01(rng), b = n01(rng);
    ds.rows.push_back({a, 2 * b, b, 2 * b});
    ds.labels.push_back(i % 2);
  }
  const auto t = MutableCorrelationTable(ds);
  EXPECT_NEAR(t[1][2], 1.0, 1e-12);
  EXPECT_EQ(t[1][3], 0.0);
  EXPECT_EQ(t[2][2], 0.0);
  EXPECT_LT(t[0][1], 0.5);
}

std::vector<Vec> Identity(int d) {
  std::vector<Vec> t(d, Vec(d, 0.0));
  return t;
}

TEST(FeatureSelectorTest, PoolExhausted) {
  const auto sel = FeatureSelector::Random({true, true, false}, Identity(3), 2, 1);
  Rng rng(0);
  const auto out = sel.Select({0, 1}, rng);
  ASSERT_FALSE(out.ok());
  EXPECT_THAT(std::string(out.status().message()), HasSubstr("pool exhausted"));
}

TEST(FeatureSelectorTest, DominantImportanceFirst) {
  const auto sel = FeatureSelector::Importance(
      std::vector<bool>(5, true), Identity(5), Vec{0.1, 0.2, 0.0, 5.0, 0.3}, 1, 0);
  Rng rng(0);
  EXPECT_THAT(*sel.Select({}, rng), ElementsAre(3));
  EXPECT_THAT(*sel.Select({3}, rng), ElementsAre(4));
}

TEST(FeatureSelectorTest, CorrelatedPartnerFollows) {
  std::vector<Vec> corr = Identity(4);
  corr[1][2] = corr[2][1] = 1.0;
  corr[1][3] = corr[3][1] = 0.4;
  const auto sel = FeatureSelector::Importance(
      std::vector<bool>(4, true), corr, Vec{0, 9, 1, 2}, 1, 1);
  Rng rng(0);
  EXPECT_THAT(*sel.Select({}, rng), ElementsAre(1, 2));
}

TEST(FeatureSelectorTest, RandomRespectsExclusions) {
  const std::vector<bool> eligible = {true, false, true, true, true, true};
  Rng rng(3);
  std::vector<Vec> corr(6, Vec(6, 0.5));
  const auto sel = FeatureSelector::Random(eligible, corr, 2, 1);
  std::vector<int> hits(6, 0);
  for (int trial = 0; trial < 500; ++trial) {
    ASSERT_OK_AND_ASSIGN(const std::vector<int> out, sel.Select({5}, rng));
    EXPECT_EQ(out.size(), 4u);
    const std::set<int> uniq(out.begin(), out.end());
    EXPECT_EQ(uniq.size(), out.size());
    EXPECT_EQ(uniq.count(1), 0u);
    EXPECT_EQ(uniq.count(5), 0u);
    for (const int j : out) ++hits[j];
  }
  for (const int j : {0, 2, 3, 4}) EXPECT_GT(hits[j], 0);
}

TEST(AdvLossTest, Arithmetic) {
  ASSERT_OK_AND_ASSIGN(SurrogateModel m, SurrogateModel::Create(2, TinyArch(), 0));
  for (Mlp* net : {&m.mutable_embed(), &m.mutable_head()}) {
    for (auto span : net->Parameters()) std::fill(span.begin(), span.end(), 0.0);
  }
  const Vec x = {1.0, 2.0};
  EXPECT_NEAR(*AdvLoss(m, x, x, 1, 1.0), std::log(0.5), 1e-15);
}

TEST(AdvLossTest, MatchesComposition) {
  ASSERT_OK_AND_ASSIGN(const SurrogateModel m,
                       SurrogateModel::Create(3, TinyArch(Activation::kPrelu), 5));
  Rng rng(4);
  std::normal_distribution<double> n01(0, 1);
  for (int i = 0; i < 10; ++i) {
    const Vec x = {n01(rng), n01(rng), n01(rng)};
    const Vec xa = {n01(rng), n01(rng), n01(rng)};
    const int y = i % 2;
    const double alpha = 0.5 * i;
    const double expected = -BceWithLogit(m.Logit(xa), y) +
                            alpha * Distance(m.Embed(xa), m.Embed(x));
    EXPECT_NEAR(*AdvLoss(m, xa, x, y, alpha), expected, 1e-10);
    EXPECT_NEAR(*AdvLoss(m, xa, x, y, 0.0), -BceWithLogit(m.Logit(xa), y), 1e-15);
  }
}

TEST(ComputePerturbationTest, MaskAndEmptySet) {
  ASSERT_OK_AND_ASSIGN(const SurrogateModel m, SurrogateModel::Create(4, TinyArch(), 2));
  Adam opt(0.1);
  const Vec x = {0.1, 0.2, 0.3, 0.4}, xa = {0.5, 0.1, -0.3, 0.9};
  ASSERT_OK_AND_ASSIGN(const Vec p, ComputePerturbation(m, xa, x, 1, {0, 2}, 1.0, opt));
  EXPECT_EQ(p[1], 0.0);
  EXPECT_EQ(p[3], 0.0);
  EXPECT_NE(p[0], 0.0);
  const auto none = ComputePerturbation(m, xa, x, 1, {}, 1.0, opt);
  ASSERT_FALSE(none.ok());
}

TEST(ComputePerturbationTest, LinearSurrogateDescends) {
  Rng rng(6);
  std::normal_distribution<double> n01(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    ASSERT_OK_AND_ASSIGN(const SurrogateModel m,
                         SurrogateModel::Create(3, TinyArch(Activation::kIdentity), trial));
    const Vec x = {n01(rng), n01(rng), n01(rng)};
    Vec xa = x;
    xa[0] += 0.5;
    const int y = trial % 2;
    Adam opt(1e-4);
    const double before = *AdvLoss(m, xa, x, y, 1.0);
    ASSERT_OK_AND_ASSIGN(const Vec p,
                         ComputePerturbation(m, xa, x, y, {0, 1, 2}, 1.0, opt));
    Vec moved = xa;
    for (int j = 0; j < 3; ++j) moved[j] += p[j];
    EXPECT_LT(*AdvLoss(m, moved, x, y, 1.0), before) << "trial " << trial;
  }
}

ConstraintSet Wide(int d) {
  return ConstraintSet::FromSchema(testing::ContinuousSchema(d));
}

TEST(TransferAttackTest, BudgetExhaustedWithoutFlip) {
  ASSERT_OK_AND_ASSIGN(SurrogateModel m, SurrogateModel::Create(3, TinyArch(), 0));
  for (Mlp* net : {&m.mutable_embed(), &m.mutable_head()}) {
    for (auto span : net->Parameters()) std::fill(span.begin(), span.end(), 0.0);
  }
  const testing::ConstantModel target(3, 0.9);
  BlackBoxHandle handle(target);
  const auto sel = FeatureSelector::Random(std::vector<bool>(3, true), Identity(3), 2, 1);
  Rng rng(0);
  ASSERT_OK_AND_ASSIGN(const TransferOutcome out,
                       TransferAttack(m, handle, Vec{1, 2, 3}, 1, TransferConfig(),
                                      sel, Wide(3), {}, rng));
  EXPECT_FALSE(out.surrogate_success);
  EXPECT_FALSE(out.attack.success);
  EXPECT_EQ(out.attack.queries, 0);
  EXPECT_EQ(handle.queries(), 0);
  EXPECT_EQ(out.selected.size(), 3u);
}

TEST(TransferAttackTest, InvalidStart) {
  ASSERT_OK_AND_ASSIGN(const SurrogateModel m, SurrogateModel::Create(2, TinyArch(), 0));
  const testing::ConstantModel target(2, 0.9);
  BlackBoxHandle handle(target);
  const auto sel = FeatureSelector::Random({true, true}, Identity(2), 2, 1);
  Rng rng(0);
  const Vec x = {0.3, 0.4};
  const auto out = TransferAttack(m, handle, x, 1 - m.Label(x), TransferConfig(),
                                  sel, Wide(2), {}, rng);
  ASSERT_FALSE(out.ok());
  EXPECT_TRUE(IsInvalidStart(out.status()));
}

struct Trained {
  Dataset data;
  SurrogateModel surrogate;
  TreeEnsemble target;
};

// Six features, only feature 0 carries the label.
Trained SingleInformativeFeature() {
  Trained t;
  t.data.schema = testing::ContinuousSchema(6);
  Rng rng(11);
  std::normal_distribution<double> n01(0, 1);
  for (int i = 0; i < 400; ++i) {
    Vec r(6);
    for (double& v : r) v = n01(rng);
    t.data.labels.push_back(r[0] > 0 ? 1 : 0);
    t.data.rows.push_back(r);
  }
  TrainConfig cfg;
  cfg.seed = 2;
  cfg.learning_rate = 1e-2;
  t.surrogate = *TrainSurrogate(t.data.rows, t.data.labels, TinyArch(), cfg);
  BoostingParams bp;
  bp.n_estimators = 30;
  t.target = *FitGradientBoosting(t.data.rows, t.data.labels, bp);
  return t;
}

TEST(TransferAttackTest, ImportanceBeatsRandomOnSingleSignal) {
  const Trained t = SingleInformativeFeature();
  const std::vector<bool> eligible(6, true);
  const auto corr = MutableCorrelationTable(t.data);
  ASSERT_OK_AND_ASSIGN(const Vec importance, MeanAbsShap(t.target, t.data.rows));
  const auto imp = FeatureSelector::Importance(eligible, corr, importance, 1, 0);
  const auto rnd = FeatureSelector::Random(eligible, corr, 1, 0);
  TransferConfig cfg;
  cfg.lambda_max_l0 = 1;
  cfg.learning_rate = 0.3;
  cfg.inner_steps = 20;
  int imp_success = 0, rnd_success = 0, n = 0;
  for (size_t i = 0; i < t.data.size() && n < 100; ++i) {
    const Vec& x = t.data.rows[i];
    const int y = t.data.labels[i];
    if (t.surrogate.Label(x) != y || t.target.Label(x) != y) continue;
    ++n;
    for (const auto* sel : {&imp, &rnd}) {
      BlackBoxHandle handle(t.target);
      Rng rng(i);
      ASSERT_OK_AND_ASSIGN(const TransferOutcome out,
                           TransferAttack(t.surrogate, handle, x, y, cfg, *sel,
                                          Wide(6), {}, rng));
      EXPECT_LE(out.attack.queries, 1);
      EXPECT_EQ(out.attack.queries, out.surrogate_success ? 1 : 0);
      if (out.surrogate_success) {
        EXPECT_EQ(out.transfer_success, t.target.Label(out.attack.x_adv) != y);
      }
      (sel == &imp ? imp_success : rnd_success) += out.transfer_success;
    }
  }
  EXPECT_EQ(n, 100);
  EXPECT_GT(imp_success, rnd_success);
}

TEST(TransferAttackTest, InvariantsUnderConstraints) {
  const Trained t = SingleInformativeFeature();
  Schema s = t.data.schema;
  s.features[1].editable = false;
  s.features[2].kind = FeatureKind::kInteger;
  const ConstraintSet c = ConstraintSet::FromSchema(s);
  const auto sel = FeatureSelector::Random(EligibleFeatures(s),
                                           MutableCorrelationTable(t.data), 2, 1);
  TransferConfig cfg;
  cfg.inner_steps = 3;
  const int lambda = 5;
  for (size_t i = 0; i < 60; ++i) {
    Vec x = t.data.rows[i];
    x[2] = std::round(x[2]);
    const int y = t.surrogate.Label(x);
    BlackBoxHandle handle(t.target);
    Rng rng(i);
    ASSERT_OK_AND_ASSIGN(const TransferOutcome out,
                         TransferAttack(t.surrogate, handle, x, y, cfg, sel, c, {}, rng));
    EXPECT_LE(static_cast<int>(out.selected.size()), lambda + 2 + 2);
    EXPECT_EQ(std::count(out.selected.begin(), out.selected.end(), 1), 0);
    EXPECT_OK(CheckConstraints(x, out.attack.x_adv, c));
    EXPECT_EQ(out.attack.x_adv[1], x[1]);
    EXPECT_LE(handle.queries(), 1);
    EXPECT_TRUE(std::isfinite(out.embedding_distance));
  }
}

}  // namespace
}  // namespace tabadv
