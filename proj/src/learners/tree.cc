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

#include "tabadv/learners/tree.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include "absl/strings/str_cat.h"
#include "tabadv/common/random.h"

namespace tabadv {
namespace {

using LeafFn = std::function<double(const std::vector<size_t>&)>;

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<Vec>& rows, std::span<const double> target,
              std::vector<int> features, int max_depth, LeafFn leaf_value)
      : rows_(rows),
        target_(target),
        features_(std::move(features)),
        max_depth_(max_depth),
        leaf_value_(std::move(leaf_value)) {}

  Tree Build(std::vector<size_t> indices) {
    Tree tree;
    BuildNode(std::move(indices), 0, &tree);
    return tree;
  }

 private:
  double MeanTarget(const std::vector<size_t>& idx) const {
    double s = 0.0;
    for (const size_t i : idx) s += target_[i];
    return s / static_cast<double>(idx.size());
  }

  SplitChoice FindSplit(const std::vector<size_t>& idx) const {
    SplitChoice best;
    const size_t n = idx.size();
    double total = 0.0, total_sq = 0.0;
    for (const size_t i : idx) {
      total += target_[i];
      total_sq += target_[i] * target_[i];
    }
    const double parent_sse = total_sq - total * total / n;
    if (parent_sse <= 1e-15) return best;

    std::vector<std::pair<double, double>> column(n);
    for (const int f : features_) {
      for (size_t k = 0; k < n; ++k) {
        column[k] = {rows_[idx[k]][f], target_[idx[k]]};
      }
      std::sort(column.begin(), column.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      double left_sum = 0.0, left_sq = 0.0;
      for (size_t k = 0; k + 1 < n; ++k) {
        left_sum += column[k].second;
        left_sq += column[k].second * column[k].second;
        if (column[k].first == column[k + 1].first) continue;
        const double nl = static_cast<double>(k + 1);
        const double nr = static_cast<double>(n - k - 1);
        const double right_sum = total - left_sum;
        const double right_sq = total_sq - left_sq;
        const double sse = (left_sq - left_sum * left_sum / nl) +
                           (right_sq - right_sum * right_sum / nr);
        const double gain = parent_sse - sse;
        if (gain > best.gain + 1e-12) {
          best.feature = f;
          best.gain = gain;
          best.threshold = 0.5 * (column[k].first + column[k + 1].first);
          // Midpoints can round onto the upper value for adjacent doubles.
          if (!(best.threshold < column[k + 1].first)) {
            best.threshold = column[k].first;
          }
        }
      }
    }
    return best;
  }

  int BuildNode(std::vector<size_t> idx, int depth, Tree* tree) {
    const int id = static_cast<int>(tree->nodes.size());
    tree->nodes.emplace_back();
    tree->nodes[id].weight = static_cast<double>(idx.size());

    SplitChoice split;
    if (depth < max_depth_ && idx.size() >= 2) split = FindSplit(idx);
    if (split.feature < 0) {
      tree->nodes[id].value = leaf_value_ ? leaf_value_(idx) : MeanTarget(idx);
      return id;
    }
    std::vector<size_t> left, right;
    for (const size_t i : idx) {
      (rows_[i][split.feature] <= split.threshold ? left : right).push_back(i);
    }
    idx.clear();
    idx.shrink_to_fit();
    const int l = BuildNode(std::move(left), depth + 1, tree);
    const int r = BuildNode(std::move(right), depth + 1, tree);
    TreeNode& node = tree->nodes[id];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  const std::vector<Vec>& rows_;
  std::span<const double> target_;
  std::vector<int> features_;
  int max_depth_;
  LeafFn leaf_value_;
};

absl::Status CheckRows(const std::vector<Vec>& rows, size_t n_targets) {
  if (rows.empty()) return absl::InvalidArgumentError("empty input");
  if (rows.size() != n_targets) {
    return absl::InvalidArgumentError("row/target count mismatch");
  }
  const size_t d = rows[0].size();
  if (d == 0) return absl::InvalidArgumentError("rows have no features");
  for (const Vec& r : rows) {
    if (r.size() != d) return absl::InvalidArgumentError("ragged rows");
    if (!AllFinite(r)) return absl::InvalidArgumentError("non-finite input");
  }
  return absl::OkStatus();
}

absl::Status CheckBinaryLabels(std::span<const int> labels) {
  bool has0 = false, has1 = false;
  for (const int l : labels) {
    if (l == 0) {
      has0 = true;
    } else if (l == 1) {
      has1 = true;
    } else {
      return absl::InvalidArgumentError("labels must be 0 or 1");
    }
  }
  if (!has0 || !has1) {
    return absl::InvalidArgumentError("single-class training data");
  }
  return absl::OkStatus();
}

// log(1 + exp(-z)), stable for large |z|.
double SoftplusNeg(double z) {
  return z > 0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
}

std::vector<size_t> DrawRows(size_t n, double fraction, Rng& rng) {
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (fraction >= 1.0) return idx;
  std::shuffle(idx.begin(), idx.end(), rng);
  const size_t m = std::max<size_t>(
      1, static_cast<size_t>(std::llround(fraction * static_cast<double>(n))));
  idx.resize(m);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<int> AllFeatures(int d) {
  std::vector<int> f(d);
  std::iota(f.begin(), f.end(), 0);
  return f;
}

}  // namespace

int Tree::Depth() const {
  std::function<int(int)> depth = [&](int n) -> int {
    if (nodes[n].is_leaf()) return 0;
    return 1 + std::max(depth(nodes[n].left), depth(nodes[n].right));
  };
  return nodes.empty() ? 0 : depth(0);
}

int Tree::NumLeaves() const {
  int n = 0;
  for (const TreeNode& node : nodes) n += node.is_leaf() ? 1 : 0;
  return n;
}

absl::string_view EnsembleKindName(EnsembleKind kind) {
  switch (kind) {
    case EnsembleKind::kRandomForest:
      return "random_forest";
    case EnsembleKind::kGradientBoosting:
      return "gradient_boosting";
    case EnsembleKind::kRegression:
      return "regression";
  }
  return "unknown";
}

absl::StatusOr<EnsembleKind> ParseEnsembleKind(absl::string_view name) {
  if (name == "random_forest") return EnsembleKind::kRandomForest;
  if (name == "gradient_boosting") return EnsembleKind::kGradientBoosting;
  if (name == "regression") return EnsembleKind::kRegression;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown ensemble kind \"", name, "\""));
}

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double TreeEnsemble::TreeScale() const {
  if (kind_ == EnsembleKind::kRandomForest) {
    return trees_.empty() ? 0.0 : 1.0 / static_cast<double>(trees_.size());
  }
  return learning_rate_;
}

double TreeEnsemble::MarginOffset() const {
  return kind_ == EnsembleKind::kRandomForest ? 0.0 : base_score_;
}

double TreeEnsemble::Margin(std::span<const double> x) const {
  double s = 0.0;
  for (const Tree& t : trees_) s += t.Predict(x);
  return MarginOffset() + TreeScale() * s;
}

double TreeEnsemble::Proba(std::span<const double> x) const {
  const double m = Margin(x);
  switch (kind_) {
    case EnsembleKind::kGradientBoosting:
      return Sigmoid(m);
    case EnsembleKind::kRandomForest:
      return m;
    case EnsembleKind::kRegression:
      return std::clamp(m, 0.0, 1.0);
  }
  return m;
}

absl::StatusOr<TreeEnsemble> FitGradientBoosting(const std::vector<Vec>& rows,
                                                 std::span<const int> labels,
                                                 const BoostingParams& params) {
  if (params.n_estimators < 1) {
    return absl::InvalidArgumentError("n_estimators must be >= 1");
  }
  if (params.max_depth < 0 || !(params.learning_rate > 0.0) ||
      !(params.subsample > 0.0 && params.subsample <= 1.0)) {
    return absl::InvalidArgumentError("invalid boosting parameters");
  }
  if (absl::Status s = CheckRows(rows, labels.size()); !s.ok()) return s;
  if (absl::Status s = CheckBinaryLabels(labels); !s.ok()) return s;

  const size_t n = rows.size();
  const int d = static_cast<int>(rows[0].size());
  double pos = 0.0;
  for (const int l : labels) pos += l;
  const double rate = pos / static_cast<double>(n);
  const double base = std::log(rate / (1.0 - rate));
  const double lr = params.learning_rate;

  std::vector<double> margin(n, base);
  std::vector<double> residual(n);
  std::vector<double> hessian(n);
  Rng rng(params.seed);
  std::vector<Tree> trees;
  trees.reserve(params.n_estimators);

  // Sum of per-row losses in a leaf after adding lr * gamma to its margins.
  auto leaf_loss = [&](const std::vector<size_t>& idx, double gamma) {
    double s = 0.0;
    for (const size_t i : idx) {
      const double sign = labels[i] == 1 ? 1.0 : -1.0;
      s += SoftplusNeg(sign * (margin[i] + lr * gamma));
    }
    return s;
  };
  auto newton_leaf = [&](const std::vector<size_t>& idx) {
    double g = 0.0, h = 0.0;
    for (const size_t i : idx) {
      g += residual[i];
      h += hessian[i];
    }
    double gamma = g / std::max(h, 1e-12);
    const double before = leaf_loss(idx, 0.0);
    for (int k = 0; k < 60 && leaf_loss(idx, gamma) > before; ++k) {
      gamma *= 0.5;
    }
    if (leaf_loss(idx, gamma) > before) gamma = 0.0;
    return gamma;
  };

  for (int t = 0; t < params.n_estimators; ++t) {
    for (size_t i = 0; i < n; ++i) {
      const double p = Sigmoid(margin[i]);
      residual[i] = labels[i] - p;
      hessian[i] = p * (1.0 - p);
    }
    TreeBuilder builder(rows, residual, AllFeatures(d), params.max_depth,
                        newton_leaf);
    Tree tree = builder.Build(DrawRows(n, params.subsample, rng));
    for (size_t i = 0; i < n; ++i) margin[i] += lr * tree.Predict(rows[i]);
    trees.push_back(std::move(tree));
  }
  return TreeEnsemble(EnsembleKind::kGradientBoosting, d, base, lr,
                      std::move(trees));
}

absl::StatusOr<TreeEnsemble> FitRandomForest(const std::vector<Vec>& rows,
                                             std::span<const int> labels,
                                             const ForestParams& params) {
  if (params.n_estimators < 1) {
    return absl::InvalidArgumentError("n_estimators must be >= 1");
  }
  if (params.max_depth < 0) {
    return absl::InvalidArgumentError("max_depth must be >= 0");
  }
  if (absl::Status s = CheckRows(rows, labels.size()); !s.ok()) return s;
  if (absl::Status s = CheckBinaryLabels(labels); !s.ok()) return s;

  const size_t n = rows.size();
  const int d = static_cast<int>(rows[0].size());
  const int per_tree = std::max(
      1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(d)))));
  std::vector<double> target(labels.begin(), labels.end());
  Rng rng(params.seed);
  std::vector<Tree> trees;
  trees.reserve(params.n_estimators);
  for (int t = 0; t < params.n_estimators; ++t) {
    std::vector<int> features = AllFeatures(d);
    std::shuffle(features.begin(), features.end(), rng);
    features.resize(per_tree);
    std::sort(features.begin(), features.end());

    std::vector<size_t> idx(n);
    if (params.bootstrap) {
      std::uniform_int_distribution<size_t> pick(0, n - 1);
      for (size_t& i : idx) i = pick(rng);
      std::sort(idx.begin(), idx.end());
    } else {
      std::iota(idx.begin(), idx.end(), 0);
    }
    TreeBuilder builder(rows, target, std::move(features), params.max_depth,
                        nullptr);
    trees.push_back(builder.Build(std::move(idx)));
  }
  return TreeEnsemble(EnsembleKind::kRandomForest, d, 0.0, 1.0,
                      std::move(trees));
}

absl::StatusOr<TreeEnsemble> FitRegressionGbm(const std::vector<Vec>& rows,
                                              std::span<const double> target,
                                              const BoostingParams& params) {
  if (params.n_estimators < 1) {
    return absl::InvalidArgumentError("n_estimators must be >= 1");
  }
  if (params.max_depth < 0 || !(params.learning_rate > 0.0) ||
      !(params.subsample > 0.0 && params.subsample <= 1.0)) {
    return absl::InvalidArgumentError("invalid boosting parameters");
  }
  if (absl::Status s = CheckRows(rows, target.size()); !s.ok()) return s;
  if (!AllFinite(target)) {
    return absl::InvalidArgumentError("non-finite target");
  }
  const size_t n = rows.size();
  const int d = static_cast<int>(rows[0].size());
  const double base =
      std::accumulate(target.begin(), target.end(), 0.0) / static_cast<double>(n);
  std::vector<double> fitted(n, base);
  std::vector<double> residual(n);
  Rng rng(params.seed);
  std::vector<Tree> trees;
  trees.reserve(params.n_estimators);
  for (int t = 0; t < params.n_estimators; ++t) {
    for (size_t i = 0; i < n; ++i) residual[i] = target[i] - fitted[i];
    TreeBuilder builder(rows, residual, AllFeatures(d), params.max_depth,
                        nullptr);
    Tree tree = builder.Build(DrawRows(n, params.subsample, rng));
    for (size_t i = 0; i < n; ++i) {
      fitted[i] += params.learning_rate * tree.Predict(rows[i]);
    }
    trees.push_back(std::move(tree));
  }
  return TreeEnsemble(EnsembleKind::kRegression, d, base, params.learning_rate,
                      std::move(trees));
}

double LogisticLoss(const TreeEnsemble& model, const std::vector<Vec>& rows,
                    std::span<const int> labels) {
  double s = 0.0;
  for (size_t i = 0; i < rows.size(); ++i) {
    const double sign = labels[i] == 1 ? 1.0 : -1.0;
    s += SoftplusNeg(sign * model.Margin(rows[i]));
  }
  return s / static_cast<double>(rows.size());
}

}  // namespace tabadv
