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

// Writes the bundled synthetic health-risk dataset and its schema.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>

#include "CLI11.hpp"
#include "tabadv/common/random.h"
#include "tabadv/runner/report.h"
#include "tabadv/schema/dataset_io.h"
#include "tabadv/schema/schema.h"

namespace {

using tabadv::FeatureKind;
using tabadv::FeatureSpec;

FeatureSpec Feature(const char* name, FeatureKind kind, double lo, double hi,
                    bool editable = true, bool dependent = false, int cardinality = 0) {
  FeatureSpec f;
  f.name = name;
  f.kind = kind;
  f.min = lo;
  f.max = hi;
  f.editable = editable;
  f.dependent = dependent;
  f.cardinality = cardinality;
  return f;
}

tabadv::Schema SyntheticSchema() {
  tabadv::Schema s;
  s.label_name = "high_risk";
  s.n_classes = 2;
  s.features = {
      Feature("age", FeatureKind::kInteger, 18, 90, /*editable=*/false),
      Feature("sex", FeatureKind::kBinary, 0, 1, /*editable=*/false),
      Feature("height", FeatureKind::kContinuous, 1.45, 2.05),
      Feature("weight", FeatureKind::kContinuous, 40, 150),
      Feature("bmi", FeatureKind::kContinuous, 10, 60, true, /*dependent=*/true),
      Feature("activity", FeatureKind::kContinuous, 0, 20),
      Feature("visits", FeatureKind::kInteger, 0, 30),
      Feature("smoker", FeatureKind::kBinary, 0, 1),
      Feature("region", FeatureKind::kCategorical, 0, 3, true, false, 4),
      Feature("income", FeatureKind::kContinuous, 0, 200),
  };
  return s;
}

double Clip(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate the synthetic dataset"};
  std::string out_dir = "data";
  int rows = 2000;
  uint64_t seed = 2026;
  app.add_option("--out-dir", out_dir, "Output directory");
  app.add_option("--rows", rows, "Number of rows")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Generator seed");
  CLI11_PARSE(app, argc, argv);

  tabadv::Dataset ds;
  ds.schema = SyntheticSchema();
  tabadv::Rng rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_int_distribution<int> region_of(0, 3);
  for (int i = 0; i < rows; ++i) {
    const double age = std::round(Clip(48 + 15 * n01(rng), 18, 90));
    const double sex = u01(rng) < 0.5 ? 1.0 : 0.0;
    const double height = Clip(1.68 + 0.07 * sex + 0.07 * n01(rng), 1.45, 2.05);
    const double weight = Clip(22 * height * height + 10 * n01(rng) + 0.1 * (age - 48), 40, 150);
    const double bmi = Clip(weight / (height * height), 10, 60);
    const double activity = Clip(6 + 3 * n01(rng) - 0.04 * (age - 48), 0, 20);
    const double visits = std::round(Clip(4 + 0.05 * (age - 48) + 2.5 * n01(rng), 0, 30));
    const double smoker = u01(rng) < 0.25 ? 1.0 : 0.0;
    const double region = region_of(rng);
    const double income = Clip(60 + 25 * n01(rng), 0, 200);
    const double logit = -0.4 + 0.035 * (age - 48) + 0.18 * (bmi - 25) -
                         0.25 * (activity - 6) + 0.2 * (visits - 4) + 1.0 * smoker +
                         0.4 * (region == 2) - 0.012 * (income - 60);
    const double u = std::clamp(u01(rng), 1e-12, 1.0 - 1e-12);
    const double noise = std::log(u / (1.0 - u));  // standard logistic
    ds.rows.push_back({age, sex, height, weight, bmi, activity, visits, smoker, region, income});
    ds.labels.push_back(logit + 0.5 * noise > 0 ? 1 : 0);
  }
  // Round continuous values so the CSV is compact and reloads exactly.
  for (tabadv::Vec& r : ds.rows) {
    for (const int j : {2, 3, 4, 5, 9}) r[j] = std::round(r[j] * 1e4) / 1e4;
  }
  std::filesystem::create_directories(out_dir);
  const std::string csv = (std::filesystem::path(out_dir) / "synthetic.csv").string();
  const std::string schema = (std::filesystem::path(out_dir) / "synthetic_schema.json").string();
  absl::Status st = tabadv::SaveCsv(csv, ds);
  if (st.ok()) {
    st = tabadv::WriteTextFile(schema, tabadv::SchemaToJson(ds.schema).dump(2) + "\n");
  }
  if (!st.ok()) {
    std::cerr << st.message() << "\n";
    return 1;
  }
  int positives = 0;
  for (const int y : ds.labels) positives += y;
  std::cout << "wrote " << rows << " rows (" << positives << " positive) to " << csv << "\n";
  return 0;
}
