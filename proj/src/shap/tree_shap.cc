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


#include "tabadv/shap/tree_shap.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "tabadv/common/status_macros.h"

namespace tabadv {
namespace {

struct PathElement {
  int feature = -1;
  double zero_fraction = 0.0;
  double one_fraction = 0.0;
  double weight = 0.0;
};

void ExtendPath(PathElement* path, int depth, double zero_fraction,
                double one_fraction, int feature) {
  path[depth] = {feature, zero_fraction, one_fraction, depth == 0 ? 1.0 : 0.0};
  for (int i = depth - 1; i >= 0; --i) {
    path[i + 1].weight += one_fraction * path[i].weight * (i + 1) /
                          static_cast<double>(depth + 1);
    path[i].weight = zero_fraction * path[i].weight * (depth - i) /
                     static_cast<double>(depth + 1);
  }
}

void UnwindPath(PathElement* path, int depth, int index) {
  const double one = path[index].one_fraction;
  const double zero = path[index].zero_fraction;
  double next = path[depth].weight;
  for (int i = depth - 1; i >= 0; --i) {
    if (one != 0.0) {
      const double tmp = path[i].weight;
      path[i].weight = next * (depth + 1) / ((i + 1) * one);
      next = tmp - path[i].weight * zero * (depth - i) /
                       static_cast<double>(depth + 1);
    } else {
      path[i].weight =
          path[i].weight * (depth + 1) / (zero * (depth - i));
    }
  }
  for (int i = index; i < depth; ++i) {
    path[i].feature = path[i + 1].feature;
    path[i].zero_fraction = path[i + 1].zero_fraction;
    path[i].one_fraction = path[i + 1].one_fraction;
  }
}

double UnwoundPathSum(const PathElement* path, int depth, int index) {
  const double one = path[index].one_fraction;
  const double zero = path[index].zero_fraction;
  double next = path[depth].weight;
  double total = 0.0;
  for (int i = depth - 1; i >= 0; --i) {
    if (one != 0.0) {
      const double tmp = next * (depth + 1) / ((i + 1) * one);
      total += tmp;
      next = path[i].weight -
             tmp * zero * (depth - i) / static_cast<double>(depth + 1);
    } else {
      total += path[i].weight / zero / ((depth - i) /
                                        static_cast<double>(depth + 1));
    }
  }
  return total;
}

class TreeExplainer {
 public:
  TreeExplainer(const Tree& tree, std::span<const double> x, Vec* phi,
                double scale)
      : tree_(tree), x_(x), phi_(*phi), scale_(scale) {
    const int d = tree.Depth() + 2;
    buffer_.resize(static_cast<size_t>(d) * (d + 1) / 2 + d);
  }

  void Run() { Recurse(0, 0, buffer_.data(), 1.0, 1.0, -1); }

 private:
  void Recurse(int node, int depth, PathElement* parent_path,
               double zero_fraction, double one_fraction, int feature) {
    PathElement* path = parent_path + depth + 1;
    std::copy(parent_path, parent_path + depth + 1, path);
    ExtendPath(path, depth, zero_fraction, one_fraction, feature);
    const TreeNode& n = tree_.nodes[node];
    if (n.is_leaf()) {
      for (int i = 1; i <= depth; ++i) {
        const double w = UnwoundPathSum(path, depth, i);
        phi_[path[i].feature] += w * (path[i].one_fraction -
                                      path[i].zero_fraction) *
                                 n.value * scale_;
      }
      return;
    }
    const int hot = x_[n.feature] <= n.threshold ? n.left : n.right;
    const int cold = hot == n.left ? n.right : n.left;
    double incoming_zero = 1.0, incoming_one = 1.0;
    int k = 0;
    for (; k <= depth; ++k) {
      if (path[k].feature == n.feature) break;
    }
    if (k != depth + 1) {
      incoming_zero = path[k].zero_fraction;
      incoming_one = path[k].one_fraction;
      UnwindPath(path, depth, k);
      --depth;
    }
    Recurse(hot, depth + 1, path,
            tree_.nodes[hot].weight / n.weight * incoming_zero, incoming_one,
            n.feature);
    Recurse(cold, depth + 1, path,
            tree_.nodes[cold].weight / n.weight * incoming_zero, 0.0,
            n.feature);
  }

  const Tree& tree_;
  std::span<const double> x_;
  Vec& phi_;
  double scale_;
  std::vector<PathElement> buffer_;
};

absl::Status CheckEnsemble(const TreeEnsemble& e, std::span<const double> x) {
  if (static_cast<int>(x.size()) != e.num_features()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "dimension mismatch: got ", x.size(), ", expected ", e.num_features()));
  }
  for (const Tree& t : e.trees()) {
    if (t.nodes.empty()) return absl::InvalidArgumentError("empty tree");
    for (const TreeNode& n : t.nodes) {
      if (!(n.weight > 0.0)) {
        return absl::InvalidArgumentError(
            "weightless tree: node_sample_weight must be > 0");
      }
    }
  }
  return absl::OkStatus();
}

// Node-weight expectation of the subtree given that features in `known`
// follow x.
double ConditionalValue(const Tree& t, int node, std::span<const double> x,
                        uint32_t known) {
  const TreeNode& n = t.nodes[node];
  if (n.is_leaf()) return n.value;
  if (known & (1u << n.feature)) {
    return ConditionalValue(
        t, x[n.feature] <= n.threshold ? n.left : n.right, x, known);
  }
  const TreeNode& l = t.nodes[n.left];
  const TreeNode& r = t.nodes[n.right];
  return (l.weight * ConditionalValue(t, n.left, x, known) +
          r.weight * ConditionalValue(t, n.right, x, known)) /
         n.weight;
}

double EnsembleConditional(const TreeEnsemble& e, std::span<const double> x,
                           uint32_t known) {
  double total = 0.0;
  for (const Tree& t : e.trees()) total += ConditionalValue(t, 0, x, known);
  return e.MarginOffset() + e.TreeScale() * total;
}

}  // namespace

absl::StatusOr<ShapExplanation> TreeShap(const TreeEnsemble& e,
                                         std::span<const double> x) {
  RETURN_IF_ERROR(CheckEnsemble(e, x));
  ShapExplanation out;
  out.attributions.assign(x.size(), 0.0);
  out.base_value = e.MarginOffset();
  const double scale = e.TreeScale();
  for (const Tree& t : e.trees()) {
    out.base_value += scale * ConditionalValue(t, 0, x, 0u);
    TreeExplainer(t, x, &out.attributions, scale).Run();
  }
  return out;
}

absl::StatusOr<ShapExplanation> ShapBruteForce(const TreeEnsemble& e,
                                               std::span<const double> x) {
  RETURN_IF_ERROR(CheckEnsemble(e, x));
  const int d = static_cast<int>(x.size());
  if (d > kMaxBruteForceFeatures) {
    return absl::InvalidArgumentError(absl::StrCat(
        "too many features for brute force: ", d, " > ",
        kMaxBruteForceFeatures));
  }
  const uint32_t subsets = 1u << d;
  Vec v(subsets);
  for (uint32_t s = 0; s < subsets; ++s) v[s] = EnsembleConditional(e, x, s);
  // w[k] = k! (d - k - 1)! / d!
  Vec w(d);
  for (int k = 0; k < d; ++k) {
    w[k] = std::exp(std::lgamma(k + 1.0) + std::lgamma(d - k + 0.0) -
                    std::lgamma(d + 1.0));
  }
  ShapExplanation out;
  out.base_value = v[0];
  out.attributions.assign(d, 0.0);
  for (int i = 0; i < d; ++i) {
    for (uint32_t s = 0; s < subsets; ++s) {
      if (s & (1u << i)) continue;
      out.attributions[i] +=
          w[std::popcount(s)] * (v[s | (1u << i)] - v[s]);
    }
  }
  return out;
}

absl::StatusOr<Vec> MeanAbsShap(const TreeEnsemble& e,
                                const std::vector<Vec>& rows) {
  if (rows.empty()) return absl::InvalidArgumentError("empty input");
  Vec mean(e.num_features(), 0.0);
  for (const Vec& r : rows) {
    ASSIGN_OR_RETURN(const ShapExplanation ex, TreeShap(e, r));
    for (size_t j = 0; j < mean.size(); ++j) {
      mean[j] += std::abs(ex.attributions[j]) / rows.size();
    }
  }
  return mean;
}

absl::StatusOr<ShapRangeTable> BuildRangeTable(
    const std::vector<Vec>& attributions, std::span<const int> classes,
    int n_classes, DetectionMode mode) {
  if (attributions.empty()) return absl::InvalidArgumentError("empty input");
  if (attributions.size() != classes.size()) {
    return absl::InvalidArgumentError("attributions and classes mismatch");
  }
  const size_t d = attributions[0].size();
  const int groups = mode == DetectionMode::kCsad ? n_classes : 1;
  ShapRangeTable table;
  table.mode = mode;
  table.lo.assign(groups, Vec(d, std::numeric_limits<double>::infinity()));
  table.hi.assign(groups, Vec(d, -std::numeric_limits<double>::infinity()));
  std::vector<int> seen(groups, 0);
  for (size_t i = 0; i < attributions.size(); ++i) {
    const int c = classes[i];
    if (c < 0 || c >= n_classes) {
      return absl::InvalidArgumentError(absl::StrCat("invalid class ", c));
    }
    const int g = mode == DetectionMode::kCsad ? c : 0;
    ++seen[g];
    for (size_t j = 0; j < d; ++j) {
      table.lo[g][j] = std::min(table.lo[g][j], attributions[i][j]);
      table.hi[g][j] = std::max(table.hi[g][j], attributions[i][j]);
    }
  }
  for (int g = 0; g < groups; ++g) {
    if (seen[g] == 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("empty class ", g, " in range table"));
    }
  }
  return table;
}

absl::StatusOr<ShapRangeTable> BuildRangeTable(const TreeEnsemble& e,
                                               const std::vector<Vec>& rows,
                                               std::span<const int> classes,
                                               int n_classes,
                                               DetectionMode mode) {
  std::vector<Vec> phi;
  phi.reserve(rows.size());
  for (const Vec& r : rows) {
    ASSIGN_OR_RETURN(ShapExplanation ex, TreeShap(e, r));
    phi.push_back(std::move(ex.attributions));
  }
  return BuildRangeTable(phi, classes, n_classes, mode);
}

int CountOutOfRange(const ShapRangeTable& table, std::span<const double> phi,
                    int cls) {
  const int g = table.mode == DetectionMode::kCsad ? cls : 0;
  int count = 0;
  for (size_t j = 0; j < phi.size(); ++j) {
    if (phi[j] < table.lo[g][j] || phi[j] > table.hi[g][j]) ++count;
  }
  return count;
}

absl::StatusOr<ImportanceAnomalyReport> ImportanceAnomaly(
    const ShapRangeTable& table, const std::vector<Vec>& attributions,
    std::span<const int> predicted_classes) {
  if (attributions.empty()) return absl::InvalidArgumentError("empty input");
  if (attributions.size() != predicted_classes.size()) {
    return absl::InvalidArgumentError("attributions and classes mismatch");
  }
  const int groups = static_cast<int>(table.lo.size());
  size_t flagged = 0, total = 0;
  for (size_t i = 0; i < attributions.size(); ++i) {
    const int c = predicted_classes[i];
    if (table.mode == DetectionMode::kCsad && (c < 0 || c >= groups)) {
      return absl::InvalidArgumentError(absl::StrCat("invalid class ", c));
    }
    if (attributions[i].size() != table.lo[0].size()) {
      return absl::InvalidArgumentError("attribution width mismatch");
    }
    const int count = CountOutOfRange(table, attributions[i], c);
    flagged += count > 0 ? 1 : 0;
    total += count;
  }
  const double n = static_cast<double>(attributions.size());
  return ImportanceAnomalyReport{flagged / n, total / n};
}

std::string ShapCsv(const std::vector<Vec>& attributions,
                    const std::vector<std::string>& feature_names) {
  std::string out = "sample_id,feature,attribution\n";
  for (size_t i = 0; i < attributions.size(); ++i) {
    for (size_t j = 0; j < attributions[i].size(); ++j) {
      const std::string name =
          j < feature_names.size() ? feature_names[j] : absl::StrCat("f", j);
      absl::StrAppendFormat(&out, "%d,%s,%.17g\n", i, name, attributions[i][j]);
    }
  }
  return out;
}

}  // namespace tabadv
