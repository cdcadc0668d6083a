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


#include "tabadv/csad/isolation_forest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "absl/strings/str_cat.h"
#include "tabadv/common/random.h"

namespace tabadv {
namespace {

class IsoBuilder {
 public:
  IsoBuilder(const std::vector<Vec>& rows, int height_limit, Rng& rng)
      : rows_(rows), height_limit_(height_limit), rng_(rng) {}

  int Build(std::vector<size_t> idx, int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back(IsoNode{});
    tree_.nodes[id].size = static_cast<int>(idx.size());
    if (depth >= height_limit_ || idx.size() <= 1) return id;

    const size_t d = rows_[idx[0]].size();
    std::vector<int> candidates;
    Vec lo(d), hi(d);
    for (size_t j = 0; j < d; ++j) {
      lo[j] = hi[j] = rows_[idx[0]][j];
      for (const size_t i : idx) {
        lo[j] = std::min(lo[j], rows_[i][j]);
        hi[j] = std::max(hi[j], rows_[i][j]);
      }
      if (hi[j] > lo[j]) candidates.push_back(static_cast<int>(j));
    }
    if (candidates.empty()) return id;
    std::uniform_int_distribution<size_t> pick(0, candidates.size() - 1);
    const int f = candidates[pick(rng_)];
    std::uniform_real_distribution<double> split(lo[f], hi[f]);
    double t = split(rng_);
    if (!(t > lo[f])) t = std::nextafter(lo[f], hi[f]);

    std::vector<size_t> left, right;
    for (const size_t i : idx) (rows_[i][f] < t ? left : right).push_back(i);
    const int l = Build(std::move(left), depth + 1);
    const int r = Build(std::move(right), depth + 1);
    IsoNode& node = tree_.nodes[id];
    node.feature = f;
    node.threshold = t;
    node.left = l;
    node.right = r;
    return id;
  }

  IsoTree Take() { return std::move(tree_); }

 private:
  const std::vector<Vec>& rows_;
  int height_limit_;
  Rng& rng_;
  IsoTree tree_;
};

}  // namespace

double AveragePathLength(double n) {
  if (n <= 1.0) return 0.0;
  const long m = std::lround(n);
  double harmonic = 0.0;
  for (long i = 1; i <= m - 1; ++i) harmonic += 1.0 / static_cast<double>(i);
  return 2.0 * harmonic - 2.0 * (n - 1.0) / n;
}

double IsoTree::PathLength(std::span<const double> x) const {
  int n = 0;
  double depth = 0.0;
  while (nodes[n].feature >= 0) {
    n = x[nodes[n].feature] < nodes[n].threshold ? nodes[n].left
                                                  : nodes[n].right;
    depth += 1.0;
  }
  return depth + AveragePathLength(nodes[n].size);
}

int IsoTree::Height() const {
  std::vector<int> depth(nodes.size(), 0);
  int h = 0;
  for (size_t i = 0; i < nodes.size(); ++i) {
    h = std::max(h, depth[i]);
    if (nodes[i].feature >= 0) {
      depth[nodes[i].left] = depth[i] + 1;
      depth[nodes[i].right] = depth[i] + 1;
    }
  }
  return h;
}

double IsolationForest::MeanPathLength(std::span<const double> x) const {
  double total = 0.0;
  for (const IsoTree& t : trees_) total += t.PathLength(x);
  return total / static_cast<double>(trees_.size());
}

double IsolationForest::Score(std::span<const double> x) const {
  return std::exp2(-MeanPathLength(x) / AveragePathLength(psi_));
}

absl::StatusOr<IsolationForest> FitIsolationForest(
    const std::vector<Vec>& rows, const IsolationForestParams& params) {
  if (params.n_trees < 1) {
    return absl::InvalidArgumentError("n_trees must be >= 1");
  }
  if (rows.size() < 2) {
    return absl::InvalidArgumentError(
        absl::StrCat("isolation forest needs at least 2 rows, got ",
                     rows.size()));
  }
  const int psi =
      std::min<int>(params.psi, static_cast<int>(rows.size()));
  if (psi < 2) return absl::InvalidArgumentError("psi must be >= 2");
  const int height_limit =
      static_cast<int>(std::ceil(std::log2(static_cast<double>(psi))));
  Rng rng(params.seed);
  std::vector<size_t> all(rows.size());
  std::iota(all.begin(), all.end(), 0);
  std::vector<IsoTree> trees;
  trees.reserve(params.n_trees);
  for (int t = 0; t < params.n_trees; ++t) {
    std::vector<size_t> sample;
    std::sample(all.begin(), all.end(), std::back_inserter(sample), psi, rng);
    IsoBuilder builder(rows, height_limit, rng);
    builder.Build(std::move(sample), 0);
    trees.push_back(builder.Take());
  }
  return IsolationForest(psi, std::move(trees));
}

}  // namespace tabadv
