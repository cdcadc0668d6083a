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

#include "tabadv/runner/report.h"

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "tabadv/common/status_macros.h"

namespace tabadv {
namespace {

using nlohmann::json;

std::string Join(const std::string& dir, const char* file) {
  return (std::filesystem::path(dir) / file).string();
}

std::string Num(double v) { return absl::StrFormat("%.17g", v); }

absl::Status Missing(absl::string_view where, absl::string_view what) {
  return absl::InvalidArgumentError(absl::StrCat("report ", where, ": ", what));
}

absl::Status CheckSize(const json& arr, size_t n, absl::string_view where) {
  if (!arr.is_array() || arr.size() != n) {
    return Missing(where, absl::StrCat("expected ", n, " entries"));
  }
  return absl::OkStatus();
}

}  // namespace

absl::Status WriteTextFile(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  out << content;
  if (!out) return absl::UnavailableError(absl::StrCat("write failed: ", path));
  return absl::OkStatus();
}

absl::StatusOr<json> ReadJsonFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::stringstream buf;
  buf << in.rdbuf();
  json j = json::parse(buf.str(), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    return absl::InvalidArgumentError(absl::StrCat("invalid JSON in ", path));
  }
  return j;
}

absl::Status EmitReport(const json& report, const std::string& dir) {
  return WriteTextFile(Join(dir, "report.json"), report.dump(2) + "\n");
}

absl::Status EmitPlotData(const json& report, const std::string& dir) {
  std::string pert = "model,attack,sample_id,metric,value\n";
  std::string det = "model,attack,sample_id,detector,mode,flag\n";
  std::string shap = "model,attack,sample_id,mode,count\n";
  std::string rates = "model,attack,detector,mode,rate\n";
  try {
    for (const json& c : report.at("cells")) {
      const std::string prefix = absl::StrCat(c.at("model").get<std::string>(), ",",
                                              c.at("attack").get<std::string>(), ",");
      const json& ids = c.at("success_ids");
      for (const char* metric : {"l0", "l2"}) {
        const json& raw = c.at(metric).at("raw");
        for (size_t i = 0; i < raw.size(); ++i) {
          absl::StrAppend(&pert, prefix, ids[i].get<int>(), ",", metric, ",",
                          Num(raw[i].get<double>()), "\n");
        }
      }
      for (const auto& [kind, modes] : c.at("detection").items()) {
        for (const auto& [mode, block] : modes.items()) {
          const json& flags = block.at("flags");
          for (size_t i = 0; i < flags.size(); ++i) {
            absl::StrAppend(&det, prefix, ids[i].get<int>(), ",", kind, ",", mode, ",",
                            flags[i].get<int>(), "\n");
          }
          absl::StrAppend(&rates, prefix, kind, ",", mode, ",",
                          block.at("rate").is_null() ? "" : Num(block.at("rate").get<double>()),
                          "\n");
        }
      }
      for (const auto& [mode, block] : c.at("importance_anomaly").items()) {
        const json& counts = block.at("counts");
        for (size_t i = 0; i < counts.size(); ++i) {
          absl::StrAppend(&shap, prefix, ids[i].get<int>(), ",", mode, ",",
                          counts[i].get<int>(), "\n");
        }
      }
    }
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("malformed report: ", e.what()));
  }
  RETURN_IF_ERROR(WriteTextFile(Join(dir, "perturbation.csv"), pert));
  RETURN_IF_ERROR(WriteTextFile(Join(dir, "detection.csv"), det));
  RETURN_IF_ERROR(WriteTextFile(Join(dir, "shap_anomaly.csv"), shap));
  return WriteTextFile(Join(dir, "detection_rates.csv"), rates);
}

absl::Status ValidateReport(const json& report) {
  try {
    if (report.at("schema_version").get<int>() != 1) {
      return Missing("schema_version", "unsupported");
    }
    for (const char* key : {"environment", "config", "data", "models", "attack_sets",
                            "detectors", "cells", "stats", "timing"}) {
      if (!report.contains(key)) return Missing(key, "missing block");
    }
    const json& config = report.at("config");
    std::set<std::pair<std::string, std::string>> expected;
    std::map<std::string, std::string> family;
    for (const json& m : config.at("models")) {
      for (const json& a : config.at("attacks")) {
        expected.insert({a.at("name").get<std::string>(), m.get<std::string>()});
        family[a.at("name").get<std::string>()] = a.at("family").get<std::string>();
      }
    }
    std::set<std::pair<std::string, std::string>> seen;
    for (const json& c : report.at("cells")) {
      const std::string attack = c.at("attack"), model = c.at("model");
      const std::string where = absl::StrCat("cell ", attack, "/", model);
      if (!expected.count({attack, model})) return Missing(where, "not configured");
      if (!seen.insert({attack, model}).second) return Missing(where, "duplicate");
      if (c.at("family") != family.at(attack)) return Missing(where, "wrong family");
      const size_t n = c.at("attack_set_size").get<size_t>();
      const size_t k = c.at("success").at("successes").get<size_t>();
      RETURN_IF_ERROR(CheckSize(c.at("sample_ids"), n, where));
      RETURN_IF_ERROR(CheckSize(c.at("queries").at("raw"), n, where));
      RETURN_IF_ERROR(CheckSize(c.at("success_ids"), k, where));
      RETURN_IF_ERROR(CheckSize(c.at("l0").at("raw"), k, where));
      RETURN_IF_ERROR(CheckSize(c.at("l2").at("raw"), k, where));
      for (const json& kind : config.at("detector_kinds")) {
        for (const json& mode : config.at("detector_modes")) {
          RETURN_IF_ERROR(CheckSize(
              c.at("detection").at(kind.get<std::string>()).at(mode.get<std::string>()).at("flags"),
              k, where));
        }
      }
      for (const json& mode : config.at("shap_modes")) {
        RETURN_IF_ERROR(CheckSize(
            c.at("importance_anomaly").at(mode.get<std::string>()).at("counts"), k, where));
      }
      // Query budget law.
      const json& queries = c.at("queries").at("raw");
      std::map<int, double> by_id;
      for (size_t i = 0; i < n; ++i) by_id[c.at("sample_ids")[i].get<int>()] = queries[i];
      if (c.at("family") == "transfer") {
        for (const json& q : queries) {
          if (q.get<double>() != 0.0 && q.get<double>() != 1.0) {
            return Missing(where, "transfer attack used more than one query");
          }
        }
      } else {
        for (const json& id : c.at("success_ids")) {
          if (by_id.at(id.get<int>()) < 1.0) {
            return Missing(where, "query attack succeeded without queries");
          }
        }
      }
    }
    if (seen.size() != expected.size()) return Missing("cells", "configured cell missing");
    const json& stats = report.at("stats");
    if (!stats.at("present").is_boolean()) return Missing("stats", "present flag");
    if (config.at("stats_enabled").get<bool>() && !stats.at("present").get<bool>()) {
      return Missing("stats", "enabled but absent");
    }
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("malformed report: ", e.what()));
  } catch (const std::out_of_range& e) {
    return absl::InvalidArgumentError(absl::StrCat("malformed report: ", e.what()));
  }
  return absl::OkStatus();
}

json WithoutTiming(const json& report) {
  json out = report;
  out.erase("timing");
  return out;
}

}  // namespace tabadv
