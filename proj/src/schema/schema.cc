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

#include "tabadv/schema/schema.h"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "tabadv/common/status_macros.h"

namespace tabadv {

absl::string_view FeatureKindName(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kContinuous:
      return "continuous";
    case FeatureKind::kInteger:
      return "integer";
    case FeatureKind::kCategorical:
      return "categorical";
    case FeatureKind::kBinary:
      return "binary";
  }
  return "unknown";
}

absl::StatusOr<FeatureKind> ParseFeatureKind(absl::string_view name) {
  if (name == "continuous") return FeatureKind::kContinuous;
  if (name == "integer") return FeatureKind::kInteger;
  if (name == "categorical") return FeatureKind::kCategorical;
  if (name == "binary") return FeatureKind::kBinary;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown feature kind \"", name, "\""));
}

absl::Status ValidateFeatureSpec(const FeatureSpec& spec) {
  if (spec.name.empty()) {
    return absl::InvalidArgumentError("feature with empty name");
  }
  if (!std::isfinite(spec.min) || !std::isfinite(spec.max) ||
      spec.min > spec.max) {
    return absl::InvalidArgumentError(
        absl::StrCat("feature ", spec.name, ": invalid range [", spec.min,
                     ", ", spec.max, "]"));
  }
  switch (spec.kind) {
    case FeatureKind::kBinary:
      if (spec.min != 0.0 || spec.max != 1.0) {
        return absl::InvalidArgumentError(
            absl::StrCat("binary feature ", spec.name, " must span [0, 1]"));
      }
      break;
    case FeatureKind::kCategorical:
      if (spec.cardinality < 2) {
        return absl::InvalidArgumentError(absl::StrCat(
            "categorical feature ", spec.name, " needs cardinality >= 2"));
      }
      if (spec.min != 0.0 || spec.max != spec.cardinality - 1) {
        return absl::InvalidArgumentError(
            absl::StrCat("categorical feature ", spec.name,
                         " must span [0, cardinality - 1]"));
      }
      break;
    case FeatureKind::kInteger:
      if (spec.min != std::round(spec.min) || spec.max != std::round(spec.max)) {
        return absl::InvalidArgumentError(absl::StrCat(
            "integer feature ", spec.name, " needs integral bounds"));
      }
      break;
    case FeatureKind::kContinuous:
      break;
  }
  return absl::OkStatus();
}

std::optional<int> Schema::FeatureIndex(absl::string_view name) const {
  for (int i = 0; i < num_features(); ++i) {
    if (features[i].name == name) return i;
  }
  return std::nullopt;
}

std::vector<int> Schema::ImmutableIndices() const {
  std::vector<int> out;
  for (int i = 0; i < num_features(); ++i) {
    if (!features[i].editable && !features[i].dependent) out.push_back(i);
  }
  return out;
}

std::vector<int> Schema::DependentIndices() const {
  std::vector<int> out;
  for (int i = 0; i < num_features(); ++i) {
    if (features[i].dependent) out.push_back(i);
  }
  return out;
}

std::vector<int> Schema::PerturbableIndices() const {
  std::vector<int> out;
  for (int i = 0; i < num_features(); ++i) {
    if (features[i].directly_perturbable()) out.push_back(i);
  }
  return out;
}

absl::Status ValidateSchema(const Schema& schema) {
  if (schema.features.empty()) {
    return absl::InvalidArgumentError("schema has no features");
  }
  if (schema.label_name.empty()) {
    return absl::InvalidArgumentError("schema has no label_name");
  }
  if (schema.n_classes < 2) {
    return absl::InvalidArgumentError("n_classes must be >= 2");
  }
  std::set<std::string> names;
  for (const FeatureSpec& f : schema.features) {
    RETURN_IF_ERROR(ValidateFeatureSpec(f));
    if (!names.insert(f.name).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate feature name ", f.name));
    }
  }
  if (names.count(schema.label_name) > 0) {
    return absl::InvalidArgumentError("label_name collides with a feature");
  }
  if (schema.PerturbableIndices().empty()) {
    return absl::InvalidArgumentError(
        "schema needs at least one mutable, non-dependent feature");
  }
  return absl::OkStatus();
}

absl::StatusOr<Schema> SchemaFromJson(const nlohmann::json& doc) {
  if (!doc.is_object()) {
    return absl::InvalidArgumentError("schema document must be an object");
  }
  Schema schema;
  try {
    schema.label_name = doc.at("label_name").get<std::string>();
    schema.n_classes = doc.value("n_classes", 2);
    for (const auto& f : doc.at("features")) {
      FeatureSpec spec;
      spec.name = f.at("name").get<std::string>();
      ASSIGN_OR_RETURN(spec.kind,
                       ParseFeatureKind(f.at("kind").get<std::string>()));
      spec.cardinality = f.value("cardinality", 0);
      double default_min = 0.0;
      double default_max = 0.0;
      if (spec.kind == FeatureKind::kBinary) default_max = 1.0;
      if (spec.kind == FeatureKind::kCategorical) {
        default_max = spec.cardinality - 1;
      }
      const bool needs_range = spec.kind == FeatureKind::kContinuous ||
                               spec.kind == FeatureKind::kInteger;
      if (needs_range && (!f.contains("min") || !f.contains("max"))) {
        return absl::InvalidArgumentError(
            absl::StrCat("feature ", spec.name, " needs min and max"));
      }
      spec.min = f.value("min", default_min);
      spec.max = f.value("max", default_max);
      spec.editable = f.value("mutable", true);
      spec.dependent = f.value("dependent", false);
      schema.features.push_back(std::move(spec));
    }
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed schema: ", e.what()));
  }
  RETURN_IF_ERROR(ValidateSchema(schema));
  return schema;
}

nlohmann::json SchemaToJson(const Schema& schema) {
  nlohmann::json features = nlohmann::json::array();
  for (const FeatureSpec& f : schema.features) {
    nlohmann::json j = {{"name", f.name},
                        {"kind", std::string(FeatureKindName(f.kind))},
                        {"min", f.min},
                        {"max", f.max},
                        {"mutable", f.editable},
                        {"dependent", f.dependent}};
    if (f.kind == FeatureKind::kCategorical) j["cardinality"] = f.cardinality;
    features.push_back(std::move(j));
  }
  return {{"label_name", schema.label_name},
          {"n_classes", schema.n_classes},
          {"features", std::move(features)}};
}

absl::StatusOr<Schema> LoadSchemaFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat(path, ": invalid JSON: ", e.what()));
  }
  return SchemaFromJson(doc);
}

Vec Dataset::Column(int feature) const {
  Vec out(rows.size());
  for (size_t r = 0; r < rows.size(); ++r) out[r] = rows[r][feature];
  return out;
}

std::vector<size_t> Dataset::ClassCounts() const {
  std::vector<size_t> counts(schema.n_classes, 0);
  for (const int l : labels) ++counts[l];
  return counts;
}

std::vector<Vec> Dataset::RowsOfClass(int label) const {
  std::vector<Vec> out;
  for (size_t r = 0; r < rows.size(); ++r) {
    if (labels[r] == label) out.push_back(rows[r]);
  }
  return out;
}

absl::Status ValidateDataset(const Dataset& ds) {
  if (ds.rows.size() != ds.labels.size()) {
    return absl::InvalidArgumentError("row/label count mismatch");
  }
  const int d = ds.num_features();
  for (size_t r = 0; r < ds.rows.size(); ++r) {
    if (static_cast<int>(ds.rows[r].size()) != d) {
      return absl::InvalidArgumentError(
          absl::StrCat("row ", r, " has ", ds.rows[r].size(),
                       " values, expected ", d));
    }
    for (int j = 0; j < d; ++j) {
      const FeatureSpec& f = ds.schema.features[j];
      const double v = ds.rows[r][j];
      if (!std::isfinite(v)) {
        return absl::InvalidArgumentError(
            absl::StrCat("row ", r, ", ", f.name, ": non-finite value"));
      }
      if (IsDiscrete(f.kind) && v != std::round(v)) {
        return absl::InvalidArgumentError(absl::StrCat(
            "row ", r, ", ", f.name, ": non-integral value ", v));
      }
      if (v < f.min || v > f.max) {
        return absl::OutOfRangeError(
            absl::StrCat("row ", r, ", ", f.name, ": value out of range (",
                         v, " not in [", f.min, ", ", f.max, "])"));
      }
    }
    const int label = ds.labels[r];
    if (label < 0 || label >= ds.schema.n_classes) {
      return absl::OutOfRangeError(
          absl::StrCat("row ", r, ": label ", label, " out of range"));
    }
  }
  return absl::OkStatus();
}

Dataset SelectRows(const Dataset& ds, const std::vector<size_t>& indices) {
  Dataset out;
  out.schema = ds.schema;
  out.rows.reserve(indices.size());
  out.labels.reserve(indices.size());
  for (const size_t i : indices) {
    out.rows.push_back(ds.rows[i]);
    out.labels.push_back(ds.labels[i]);
  }
  return out;
}

}  // namespace tabadv
