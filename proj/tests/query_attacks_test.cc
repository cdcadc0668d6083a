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
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "tabadv/attacks/black_box.h"
#include "tabadv/attacks/query_attacks.h"
#include "tabadv/learners/tree.h"
#include "test_util.h"

namespace tabadv {
namespace {

using ::testing::HasSubstr;
using testing::ConstantModel;
using testing::Continuous;
using testing::Integer;
using testing::LinearModel;
using testing::MakeSchema;

NormalInit WideInit(int d, double sd = 10.0) {
  NormalInit init;
  init.mean.assign(d, 0.0);
  init.stddev.assign(d, sd);
  return init;
}

BoundaryConfig SmallBoundary() {
  BoundaryConfig cfg;
  cfg.max_iter = 200;
  return cfg;
}

HsjConfig SmallHsj() {
  HsjConfig cfg;
  cfg.max_iter = 20;
  cfg.init_eval = 50;
  cfg.max_eval = 500;
  return cfg;
}

TEST(BlackBoxHandleTest, CountsEveryPrediction) {
  const LinearModel model({1.0}, 0.0);
  BlackBoxHandle m(model);
  EXPECT_EQ(m.queries(), 0);
  m.Label(Vec{1.0});
  m.Proba(Vec{-1.0});
  m.Label(Vec{0.0});
  EXPECT_EQ(m.queries(), 3);
}

TEST(OrthogonalPerturbationTest, ZeroDistanceIsError) {
  Rng rng(0);
  const auto step = OrthogonalPerturbation(Vec{1, 2}, Vec{1, 2}, 1, 1, rng);
  ASSERT_FALSE(step.ok());
  EXPECT_THAT(std::string(step.status().message()), HasSubstr("zero-distance"));
}

TEST(OrthogonalPerturbationTest, VanishingDeltaIsPureContraction) {
  Rng rng(1);
  const Vec x = {0, 0, 0}, x_adv = {3, 4, 12};
  ASSERT_OK_AND_ASSIGN(const OrthogonalStep step,
                       OrthogonalPerturbation(x, x_adv, 1e-12, 0.25, rng));
  const Vec expected = Lerp(x_adv, x, 0.25);
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(step.candidate[j], expected[j], 1e-9);
}

TEST(OrthogonalPerturbationTest, SphereStepPreservesDistance) {
  Rng rng(2);
  std::normal_distribution<double> n01(0, 1);
  for (int i = 0; i < 10000; ++i) {
    Vec x(4), x_adv(4);
    for (int j = 0; j < 4; ++j) {
      x[j] = n01(rng);
      x_adv[j] = x[j] + 3 * n01(rng);
    }
    ASSERT_OK_AND_ASSIGN(const OrthogonalStep step,
                         OrthogonalPerturbation(x, x_adv, 0.5, 0.1, rng));
    EXPECT_NEAR(Distance(x, step.sphere), Distance(x, x_adv), 1e-9);
  }
}

TEST(BinarySearchBoundaryTest, FindsThreshold) {
  const LinearModel model({1.0}, 0.0);
  BlackBoxHandle m(model);
  ASSERT_OK_AND_ASSIGN(const Vec b, BinarySearchBoundary(m, Vec{-1}, Vec{3}, 0, 1e-6));
  EXPECT_NEAR(b[0], 0.0, 1e-6);
  EXPECT_GT(b[0], 0.0);
}

TEST(BinarySearchBoundaryTest, WithinToleranceReturnsAdv) {
  const LinearModel model({1.0}, 0.0);
  BlackBoxHandle m(model);
  ASSERT_OK_AND_ASSIGN(const Vec b,
                       BinarySearchBoundary(m, Vec{-1e-8}, Vec{1e-8}, 0, 1e-6));
  EXPECT_EQ(b, Vec{1e-8});
}

TEST(BinarySearchBoundaryTest, SameSideIsError) {
  const LinearModel model({1.0}, 0.0);
  BlackBoxHandle m(model);
  const auto b = BinarySearchBoundary(m, Vec{-1}, Vec{-3}, 0, 1e-6);
  ASSERT_FALSE(b.ok());
  EXPECT_THAT(std::string(b.status().message()), HasSubstr("same side"));
}

TEST(EstimateUpdateTest, AlignsWithLinearNormal) {
  const Vec normal = {0.6, 0.8};
  const LinearModel model(normal, -1.0);
  int passes = 0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    BlackBoxHandle m(model);
    Rng rng(seed);
    // (0.6, 0.8) lies on the boundary w . x = 1.
    ASSERT_OK_AND_ASSIGN(const Vec g,
                         EstimateUpdate(m, Vec{0.6, 0.8}, 0, 500, 0.1, rng));
    EXPECT_NEAR(Norm2(g), 1.0, 1e-12);
    EXPECT_EQ(m.queries(), 500);
    passes += Dot(g, normal) > 0.5;
  }
  EXPECT_GE(passes, 18);
}

TEST(EstimateUpdateTest, Errors) {
  const ConstantModel always_one(2, 1.0);
  BlackBoxHandle m(always_one);
  Rng rng(0);
  EXPECT_FALSE(EstimateUpdate(m, Vec{0, 0}, 0, 1, 0.1, rng).ok());
  const auto g = EstimateUpdate(m, Vec{0, 0}, 0, 50, 0.1, rng);
  ASSERT_FALSE(g.ok());
  EXPECT_THAT(std::string(g.status().message()), HasSubstr("degenerate probes"));
}

class QueryAttackTest : public ::testing::TestWithParam<bool> {
 protected:
  absl::StatusOr<AttackOutcome> Run(BlackBoxHandle& m, const Vec& x, int y,
                                    const ConstraintSet& c,
                                    const NormalInit& init, uint64_t seed) {
    Rng rng(seed);
    if (GetParam()) {
      return BoundaryAttack(m, x, y, SmallBoundary(), init, c, {}, rng);
    }
    return HopSkipJumpAttack(m, x, y, SmallHsj(), init, c, {}, rng);
  }
};

TEST_P(QueryAttackTest, InvalidStart) {
  const LinearModel model({1.0}, 0.0);
  BlackBoxHandle m(model);
  const auto out = Run(m, Vec{1.0}, 0,
                       ConstraintSet::FromSchema(testing::ContinuousSchema(1)),
                       WideInit(1), 0);
  ASSERT_FALSE(out.ok());
  EXPECT_TRUE(IsInvalidStart(out.status())) << out.status();
}

TEST_P(QueryAttackTest, InitFailed) {
  const ConstantModel zero(2, 0.0);
  BlackBoxHandle m(zero);
  const auto out = Run(m, Vec{1.0, 1.0}, 0,
                       ConstraintSet::FromSchema(testing::ContinuousSchema(2)),
                       WideInit(2), 0);
  ASSERT_FALSE(out.ok());
  EXPECT_TRUE(IsInitFailed(out.status())) << out.status();
}

TEST_P(QueryAttackTest, OneDimensionalThreshold) {
  const LinearModel model({1.0}, 0.0);
  const ConstraintSet c = ConstraintSet::FromSchema(testing::ContinuousSchema(1));
  for (uint64_t seed = 0; seed < 5; ++seed) {
    BlackBoxHandle m(model);
    const int64_t calls_before = model.calls();
    ASSERT_OK_AND_ASSIGN(const AttackOutcome out,
                         Run(m, Vec{-1.0}, 0, c, WideInit(1), seed));
    ASSERT_TRUE(out.success);
    EXPECT_GT(out.x_adv[0], 0.0);
    EXPECT_LE(Distance(Vec{-1.0}, out.x_adv), out.l2_trace.front());
    EXPECT_LT(out.x_adv[0], 0.05);
    EXPECT_EQ(out.queries, m.queries());
    EXPECT_EQ(out.queries, model.calls() - calls_before);
  }
}

TEST_P(QueryAttackTest, ImmutableFeatureIsPreserved) {
  const Schema s = MakeSchema({Continuous("a", -100, 100),
                               Continuous("b", -100, 100, /*editable=*/false)});
  const ConstraintSet c = ConstraintSet::FromSchema(s);
  const LinearModel model({1.0, 0.0}, 0.0);
  BlackBoxHandle m(model);
  const Vec x = {-2.0, 7.25};
  ASSERT_OK_AND_ASSIGN(const AttackOutcome out, Run(m, x, 0, c, WideInit(2), 3));
  ASSERT_TRUE(out.success);
  EXPECT_EQ(out.x_adv[1], 7.25);
  EXPECT_EQ(model.Label(out.x_adv), 1);
}

TEST_P(QueryAttackTest, TraceMonotoneAndDeterministic) {
  const LinearModel model({1.0, -2.0, 0.5}, 0.3);
  const ConstraintSet c = ConstraintSet::FromSchema(testing::ContinuousSchema(3));
  const Vec x = {-1.0, 1.0, 0.0};
  BlackBoxHandle m1(model), m2(model);
  ASSERT_OK_AND_ASSIGN(const AttackOutcome a, Run(m1, x, 0, c, WideInit(3), 11));
  ASSERT_OK_AND_ASSIGN(const AttackOutcome b, Run(m2, x, 0, c, WideInit(3), 11));
  EXPECT_EQ(a.x_adv, b.x_adv);
  EXPECT_EQ(a.queries, b.queries);
  EXPECT_EQ(a.l2_trace, b.l2_trace);
  for (size_t i = 1; i < a.l2_trace.size(); ++i) {
    if (GetParam()) {
      EXPECT_LT(a.l2_trace[i], a.l2_trace[i - 1]);
    } else {
      EXPECT_LE(a.l2_trace[i], a.l2_trace[i - 1]);
    }
  }
  EXPECT_NEAR(a.l2_trace.back(), Distance(x, a.x_adv), 0.0);
}

TEST_P(QueryAttackTest, SuccessImpliesValidAdversarialOnTrees) {
  const Schema s = MakeSchema({Continuous("a", -10, 10), Integer("b", -10, 10),
                               Continuous("c", -10, 10, /*editable=*/false),
                               testing::Binary("d")});
  const ConstraintSet c = ConstraintSet::FromSchema(s);
  Dataset ds = testing::GaussianBlobs(4, 60, 2.0, 4);
  ds.schema = s;
  for (Vec& r : ds.rows) {
    for (double& v : r) v = std::clamp(v, -10.0, 10.0);
    r[1] = std::round(r[1]);
    r[3] = r[3] > 1.0 ? 1.0 : 0.0;
  }
  BoostingParams p;
  p.n_estimators = 20;
  ASSERT_OK_AND_ASSIGN(const TreeEnsemble model,
                       FitGradientBoosting(ds.rows, ds.labels, p));
  const NormalInit init = NormalInit::Fit(ds.rows);
  int successes = 0;
  for (size_t i = 0; i < ds.size(); i += 12) {
    const int y = ds.labels[i];
    if (model.Label(ds.rows[i]) != y) continue;
    BlackBoxHandle m(model);
    const auto out = Run(m, ds.rows[i], y, c, init, i);
    if (!out.ok()) {
      EXPECT_TRUE(IsInitFailed(out.status())) << out.status();
      continue;
    }
    ASSERT_TRUE(out->success);
    ++successes;
    EXPECT_NE(model.Label(out->x_adv), y);
    EXPECT_OK(CheckConstraints(ds.rows[i], out->x_adv, c));
  }
  EXPECT_GT(successes, 0);
}

INSTANTIATE_TEST_SUITE_P(Attacks, QueryAttackTest, ::testing::Bool(),
                         [](const auto& info) {
                           return info.param ? "Boundary" : "HopSkipJump";
                         });

TEST(BoundaryAttackTest, RespectsQueryBudget) {
  const LinearModel model({1.0, 1.0}, 0.0);
  BlackBoxHandle m(model);
  BoundaryConfig cfg = SmallBoundary();
  cfg.max_queries = 100;
  Rng rng(0);
  ASSERT_OK_AND_ASSIGN(
      const AttackOutcome out,
      BoundaryAttack(m, Vec{-1, -1}, 0, cfg, WideInit(2),
                     ConstraintSet::FromSchema(testing::ContinuousSchema(2)), {},
                     rng));
  EXPECT_LE(out.queries, 100 + 2 * cfg.num_trials + 1);
}

TEST(HsjTest, RespectsQueryBudget) {
  const LinearModel model({1.0, 1.0}, 0.0);
  BlackBoxHandle m(model);
  HsjConfig cfg = SmallHsj();
  cfg.max_queries = 300;
  Rng rng(0);
  ASSERT_OK_AND_ASSIGN(
      const AttackOutcome out,
      HopSkipJumpAttack(m, Vec{-1, -1}, 0, cfg, WideInit(2),
                        ConstraintSet::FromSchema(testing::ContinuousSchema(2)),
                        {}, rng));
  EXPECT_LE(out.queries, 300 + 100);
}

}  // namespace
}  // namespace tabadv
