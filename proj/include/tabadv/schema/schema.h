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

#ifndef TABADV_SCHEMA_SCHEMA_H_
#define TABADV_SCHEMA_SCHEMA_H_

#include <optional>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "json.hpp"
#include "tabadv/common/vec.h"

namespace tabadv {

enum class FeatureKind { kContinuous, kInteger, kCategorical, kBinary };

absl::string_view FeatureKindName(FeatureKind kind);
absl::StatusOr<FeatureKind> ParseFeatureKind(absl::string_view name);

// Integer, categorical and binary columns hold integral values.
inline bool IsDiscrete(FeatureKind kind) {
  return kind != FeatureKind::kContinuous;
}

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::kContinuous;
  // Only meaningful for categorical features.
  int cardinality = 0;
  double min = 0.0;
  double max = 0.0;
  // Whether the attacker may change the value.
  bool editable = true;
  // Value is determined by other features and corrected, never perturbed.
  bool dependent = false;

  // Editable and not dependent.
  bool directly_perturbable() const { return editable && !dependent; }
};

absl::Status ValidateFeatureSpec(const FeatureSpec& spec);

struct Schema {
  std::vector<FeatureSpec> features;
  std::string label_name;
  int n_classes = 2;

  int num_features() const { return static_cast<int>(features.size()); }
  std::optional<int> FeatureIndex(absl::string_view name) const;
  std::vector<int> ImmutableIndices() const;
  std::vector<int> DependentIndices() const;
  std::vector<int> PerturbableIndices() const;
};

// Checks feature specs, name uniqueness, the class count, and that at least
// one feature can be perturbed directly.
absl::Status ValidateSchema(const Schema& schema);

// Schema documents are JSON:
//   {"label_name": "y", "n_classes": 2,
//    "features": [{"name": "age", "kind": "integer", "min": 18, "max": 90,
//                  "mutable": false, "dependent": false}, ...]}
// Categorical features additionally carry "cardinality"; their min/max may be
// omitted and default to [0, cardinality - 1]. Binary min/max default to
// [0, 1].
absl::StatusOr<Schema> SchemaFromJson(const nlohmann::json& doc);
nlohmann::json SchemaToJson(const Schema& schema);
absl::StatusOr<Schema> LoadSchemaFile(const std::string& path);

struct Dataset {
  Schema schema;
  std::vector<Vec> rows;
  std::vector<int> labels;

  size_t size() const { return rows.size(); }
  int num_features() const { return schema.num_features(); }
  Vec Column(int feature) const;
  std::vector<size_t> ClassCounts() const;
  // Rows (in order) whose label equals `label`.
  std::vector<Vec> RowsOfClass(int label) const;
};

// Every value inside its feature range, discrete columns integral, labels in
// [0, n_classes).
absl::Status ValidateDataset(const Dataset& ds);

Dataset SelectRows(const Dataset& ds, const std::vector<size_t>& indices);

}  // namespace tabadv

#endif  // TABADV_SCHEMA_SCHEMA_H_
