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


#ifndef TABADV_CSAD_ISOLATION_FOREST_H_
#define TABADV_CSAD_ISOLATION_FOREST_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "tabadv/common/vec.h"

namespace tabadv {

// Average unsuccessful-search path length of a BST with n keys:
// 2 H(n - 1) - 2 (n - 1) / n, with c(1) = 0.
double AveragePathLength(double n);

struct IsoNode {
  int feature = -1;  // -1 for external nodes.
  double threshold = 0.0;  // x[feature] < threshold goes left.
  int left = -1;
  int right = -1;
  int size = 0;  // Training rows that reached the node.
};

struct IsoTree {
  std::vector<IsoNode> nodes;

  // Edges from the root to the external node, plus c(size) there.
  double PathLength(std::span<const double> x) const;
  int Height() const;
};

struct IsolationForestParams {
  int n_trees = 100;
  int psi = 256;  // Clamped to the row count.
  uint64_t seed = 0;
};

class IsolationForest {
 public:
  IsolationForest() = default;
  IsolationForest(int psi, std::vector<IsoTree> trees)
      : psi_(psi), trees_(std::move(trees)) {}

  int psi() const { return psi_; }
  const std::vector<IsoTree>& trees() const { return trees_; }

  double MeanPathLength(std::span<const double> x) const;
  // 2^(-E[h(x)] / c(psi)); higher is more anomalous.
  double Score(std::span<const double> x) const;

 private:
  int psi_ = 0;
  std::vector<IsoTree> trees_;
};

// Each tree sees psi rows drawn without replacement, picks one non-constant
// feature per split uniformly and a uniform split value within its observed
// range, and stops at height ceil(log2 psi).
absl::StatusOr<IsolationForest> FitIsolationForest(
    const std::vector<Vec>& rows, const IsolationForestParams& params);

}  // namespace tabadv

#endif  // TABADV_CSAD_ISOLATION_FOREST_H_
