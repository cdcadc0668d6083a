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

#include "tabadv/schema/preprocess.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "absl/strings/str_cat.h"
#include "tabadv/common/random.h"
#include "tabadv/common/status_macros.h"

namespace tabadv {

absl::StatusOr<double> Pearson(std::span<const double> x,
                               std::span<const double> y) {
  if (x.size() != y.size()) {
    return absl::InvalidArgumentError("length mismatch");
  }
  if (x.size() < 2) return absl::InvalidArgumentError("need at least 2 values");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) {
    return absl::InvalidArgumentError("zero variance");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double PearsonOrZero(std::span<const double> x, std::span<const double> y) {
  const absl::StatusOr<double> r = Pearson(x, y);
  return r.ok() ? *r : 0.0;
}

std::vector<std::vector<double>> AbsCorrelationMatrix(const Dataset& ds) {
  const int d = ds.num_features();
  std::vector<Vec> columns(d);
  for (int j = 0; j < d; ++j) columns[j] = ds.Column(j);
  std::vector<std::vector<double>> m(d, std::vector<double>(d, 0.0));
  for (int i = 0; i < d; ++i) {
    m[i][i] = 1.0;
    for (int j = i + 1; j < d; ++j) {
      m[i][j] = m[j][i] = std::abs(PearsonOrZero(columns[i], columns[j]));
    }
  }
  return m;
}

absl::StatusOr<DropCorrelatedResult> DropCorrelated(const Dataset& ds,
                                                    double threshold,
                                                    uint64_t seed) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    return absl::InvalidArgumentError("threshold must be in (0, 1]");
  }
  const int d = ds.num_features();
  const auto corr = AbsCorrelationMatrix(ds);

  // Union-find over the |r| > threshold graph.
  std::vector<int> parent(d);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      if (corr[i][j] > threshold) parent[find(i)] = find(j);
    }
  }
  std::vector<std::vector<int>> components(d);
  for (int i = 0; i < d; ++i) components[find(i)].push_back(i);

  Rng rng(seed);
  std::vector<bool> keep(d, true);
  for (const auto& comp : components) {
    if (comp.size() < 2) continue;
    std::uniform_int_distribution<size_t> pick(0, comp.size() - 1);
    const int kept = comp[pick(rng)];
    for (const int f : comp) keep[f] = f == kept;
  }

  DropCorrelatedResult result;
  result.seed = seed;
  result.dataset.schema = ds.schema;
  result.dataset.schema.features.clear();
  std::vector<int> kept_columns;
  for (int j = 0; j < d; ++j) {
    if (keep[j]) {
      kept_columns.push_back(j);
      result.dataset.schema.features.push_back(ds.schema.features[j]);
    } else {
      result.dropped.push_back(ds.schema.features[j].name);
    }
  }
  RETURN_IF_ERROR(ValidateSchema(result.dataset.schema));
  result.dataset.labels = ds.labels;
  result.dataset.rows.reserve(ds.size());
  for (const Vec& row : ds.rows) {
    Vec r;
    r.reserve(kept_columns.size());
    for (const int j : kept_columns) r.push_back(row[j]);
    result.dataset.rows.push_back(std::move(r));
  }
  return result;
}

absl::StatusOr<std::pair<Dataset, Dataset>> TrainTestSplit(
    const Dataset& ds, double train_fraction, uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    return absl::InvalidArgumentError("train_fraction must be in (0, 1)");
  }
  const size_t n = ds.size();
  const size_t n_train = static_cast<size_t>(
      std::llround(train_fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train >= n) {
    return absl::InvalidArgumentError("partition too small");
  }
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<size_t> train(order.begin(), order.begin() + n_train);
  std::vector<size_t> test(order.begin() + n_train, order.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return std::make_pair(SelectRows(ds, train), SelectRows(ds, test));
}

absl::StatusOr<Dataset> OversampleMinority(const Dataset& ds,
                                           int minority_class) {
  if (minority_class < 0 || minority_class >= ds.schema.n_classes) {
    return absl::InvalidArgumentError("class out of range");
  }
  const std::vector<size_t> counts = ds.ClassCounts();
  if (counts[minority_class] == 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("class ", minority_class, " absent"));
  }
  std::vector<size_t> members;
  for (size_t r = 0; r < ds.size(); ++r) {
    if (ds.labels[r] == minority_class) members.push_back(r);
  }
  const size_t target = *std::max_element(counts.begin(), counts.end());
  Dataset out = ds;
  for (size_t i = 0; members.size() + i < target; ++i) {
    const size_t src = members[i % members.size()];
    out.rows.push_back(ds.rows[src]);
    out.labels.push_back(minority_class);
  }
  return out;
}

}  // namespace tabadv
