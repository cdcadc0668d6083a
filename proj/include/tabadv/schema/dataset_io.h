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

#ifndef TABADV_SCHEMA_DATASET_IO_H_
#define TABADV_SCHEMA_DATASET_IO_H_

#include <string>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "tabadv/schema/schema.h"

namespace tabadv {

// Parses CSV text with a header row. Columns may appear in any order but every
// schema feature and the label column must be present. Empty cells and
// non-numeric cells are rejected (no imputation).
absl::StatusOr<Dataset> ParseCsv(absl::string_view content,
                                 const Schema& schema);

absl::StatusOr<Dataset> LoadCsv(const std::string& path, const Schema& schema);

// Writes header + rows in schema order. Discrete columns are written as
// integers, continuous ones with round-trip precision.
std::string FormatCsv(const Dataset& ds);
absl::Status SaveCsv(const std::string& path, const Dataset& ds);

}  // namespace tabadv

#endif  // TABADV_SCHEMA_DATASET_IO_H_
