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

#include "tabadv/schema/dataset_io.h"

#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "tabadv/common/status_macros.h"

namespace tabadv {
namespace {

std::vector<std::string> SplitLine(absl::string_view line) {
  std::vector<std::string> cells = absl::StrSplit(line, ',');
  for (std::string& c : cells) {
    absl::StripAsciiWhitespace(&c);
    if (c.size() >= 2 && c.front() == '"' && c.back() == '"') {
      c = c.substr(1, c.size() - 2);
    }
  }
  return cells;
}

}  // namespace

absl::StatusOr<Dataset> ParseCsv(absl::string_view content,
                                 const Schema& schema) {
  RETURN_IF_ERROR(ValidateSchema(schema));
  std::vector<absl::string_view> lines;
  for (absl::string_view line : absl::StrSplit(content, '\n')) {
    absl::ConsumeSuffix(&line, "\r");
    if (!absl::StripAsciiWhitespace(line).empty()) lines.push_back(line);
  }
  if (lines.empty()) return absl::InvalidArgumentError("empty file");

  const std::vector<std::string> header = SplitLine(lines[0]);
  const int d = schema.num_features();
  std::vector<int> column_of_feature(d, -1);
  int label_column = -1;
  for (int c = 0; c < static_cast<int>(header.size()); ++c) {
    if (header[c] == schema.label_name) {
      label_column = c;
    } else if (const auto idx = schema.FeatureIndex(header[c])) {
      column_of_feature[*idx] = c;
    }
  }
  for (int j = 0; j < d; ++j) {
    if (column_of_feature[j] < 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("missing column ", schema.features[j].name));
    }
  }
  if (label_column < 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("missing column ", schema.label_name));
  }
  if (lines.size() < 2) return absl::InvalidArgumentError("empty file");

  Dataset ds;
  ds.schema = schema;
  for (size_t li = 1; li < lines.size(); ++li) {
    const std::vector<std::string> cells = SplitLine(lines[li]);
    if (cells.size() != header.size()) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", li + 1, ": expected ", header.size(),
                       " cells, got ", cells.size()));
    }
    Vec row(d);
    for (int j = 0; j < d; ++j) {
      const std::string& cell = cells[column_of_feature[j]];
      if (cell.empty()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "line ", li + 1, ", ", schema.features[j].name, ": missing value"));
      }
      if (!absl::SimpleAtod(cell, &row[j]) || !std::isfinite(row[j])) {
        return absl::InvalidArgumentError(
            absl::StrCat("line ", li + 1, ", ", schema.features[j].name,
                         ": not a number \"", cell, "\""));
      }
    }
    double label_value = 0.0;
    const std::string& label_cell = cells[label_column];
    if (!absl::SimpleAtod(label_cell, &label_value) ||
        label_value != std::round(label_value)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "line ", li + 1, ": invalid label \"", label_cell, "\""));
    }
    ds.rows.push_back(std::move(row));
    ds.labels.push_back(static_cast<int>(label_value));
  }
  RETURN_IF_ERROR(ValidateDataset(ds));
  return ds;
}

absl::StatusOr<Dataset> LoadCsv(const std::string& path,
                                const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  absl::StatusOr<Dataset> ds = ParseCsv(buffer.str(), schema);
  if (!ds.ok()) {
    return absl::Status(ds.status().code(),
                        absl::StrCat(path, ": ", ds.status().message()));
  }
  return ds;
}

std::string FormatCsv(const Dataset& ds) {
  std::string out;
  for (const FeatureSpec& f : ds.schema.features) {
    absl::StrAppend(&out, f.name, ",");
  }
  absl::StrAppend(&out, ds.schema.label_name, "\n");
  for (size_t r = 0; r < ds.size(); ++r) {
    for (int j = 0; j < ds.num_features(); ++j) {
      const double v = ds.rows[r][j];
      if (IsDiscrete(ds.schema.features[j].kind)) {
        absl::StrAppend(&out, static_cast<int64_t>(v), ",");
      } else {
        absl::StrAppend(&out, absl::StrFormat("%.17g", v), ",");
      }
    }
    absl::StrAppend(&out, ds.labels[r], "\n");
  }
  return out;
}

absl::Status SaveCsv(const std::string& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  out << FormatCsv(ds);
  if (!out) return absl::DataLossError(absl::StrCat("write failed: ", path));
  return absl::OkStatus();
}

}  // namespace tabadv
