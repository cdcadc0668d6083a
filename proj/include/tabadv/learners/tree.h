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

#ifndef TABADV_LEARNERS_TREE_H_
#define TABADV_LEARNERS_TREE_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "tabadv/common/vec.h"
#include "tabadv/learners/classifier.h"

namespace tabadv {

// Flat node. Internal nodes route x[feature] <= threshold to `left`.
struct TreeNode {
  int feature = -1;  // -1 for leaves.
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // Leaf output.
  // Number of training rows that reached the node. Tree-SHAP uses it as the
  // path-dependent background distribution, so it must be > 0.
  double weight = 0.0;

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root.

  int LeafIndex(std::span<const double> x) const {
    int n = 0;
    while (!nodes[n].is_leaf()) {
      n = x[nodes[n].feature] <= nodes[n].threshold ? nodes[n].left
                                                    : nodes[n].right;
    }
    return n;
  }
  double Predict(std::span<const double> x) const {
    return nodes[LeafIndex(x)].value;
  }
  int Depth() const;
  int NumLeaves() const;
};

enum class EnsembleKind { kRandomForest, kGradientBoosting, kRegression };

absl::string_view EnsembleKindName(EnsembleKind kind);
absl::StatusOr<EnsembleKind> ParseEnsembleKind(absl::string_view name);

double Sigmoid(double z);

// Random forest: proba = mean of per-tree class-1 leaf fractions.
// Gradient boosting: proba = sigmoid(base_score + learning_rate * sum).
// Regression: value = base_score + learning_rate * sum.
class TreeEnsemble : public Classifier {
 public:
  TreeEnsemble() = default;
  TreeEnsemble(EnsembleKind kind, int num_features, double base_score,
               double learning_rate, std::vector<Tree> trees)
      : kind_(kind),
        num_features_(num_features),
        base_score_(base_score),
        learning_rate_(learning_rate),
        trees_(std::move(trees)) {}

  EnsembleKind kind() const { return kind_; }
  int num_features() const override { return num_features_; }
  double base_score() const { return base_score_; }
  double learning_rate() const { return learning_rate_; }
  const std::vector<Tree>& trees() const { return trees_; }

  // Per-tree multiplier applied to leaf values when summing the margin.
  double TreeScale() const;
  // Constant term of the margin.
  double MarginOffset() const;
  // Log-odds for boosting, probability for forests, value for regression.
  double Margin(std::span<const double> x) const;
  double Proba(std::span<const double> x) const override;
  double Value(std::span<const double> x) const { return Margin(x); }

 private:
  EnsembleKind kind_ = EnsembleKind::kGradientBoosting;
  int num_features_ = 0;
  double base_score_ = 0.0;
  double learning_rate_ = 1.0;
  std::vector<Tree> trees_;
};

struct BoostingParams {
  int n_estimators = 100;
  int max_depth = 3;
  double learning_rate = 0.1;
  // Row fraction drawn (without replacement) for each tree.
  double subsample = 1.0;
  uint64_t seed = 0;
};

struct ForestParams {
  int n_estimators = 100;
  int max_depth = 8;
  // Per-tree bootstrap resampling of rows; off by default.
  bool bootstrap = false;
  uint64_t seed = 0;
};

// Logistic boosting: each tree fits the negative gradient y - p with squared
// error splits; leaf values are damped Newton steps, so the training loss never
// increases as trees are added (for learning_rate <= 1).
absl::StatusOr<TreeEnsemble> FitGradientBoosting(const std::vector<Vec>& rows,
                                                 std::span<const int> labels,
                                                 const BoostingParams& params);

// CART forest on {0,1} labels with Gini (equivalently squared error) splits.
// Each tree sees floor(sqrt(d)) randomly chosen features.
absl::StatusOr<TreeEnsemble> FitRandomForest(const std::vector<Vec>& rows,
                                             std::span<const int> labels,
                                             const ForestParams& params);

// Squared-error boosting with base_score = mean(target).
absl::StatusOr<TreeEnsemble> FitRegressionGbm(const std::vector<Vec>& rows,
                                              std::span<const double> target,
                                              const BoostingParams& params);

// Mean logistic loss of a boosted classifier's margins.
double LogisticLoss(const TreeEnsemble& model, const std::vector<Vec>& rows,
                    std::span<const int> labels);

}  // namespace tabadv

#endif  // TABADV_LEARNERS_TREE_H_
