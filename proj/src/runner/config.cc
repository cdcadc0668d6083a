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

#include "tabadv/runner/config.h"

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "tabadv/common/status_macros.h"

namespace tabadv {
namespace {

using nlohmann::json;

absl::Status Bad(const std::string& where, absl::string_view what) {
  return absl::InvalidArgumentError(absl::StrCat(where, ": ", what));
}

absl::Status CheckKeys(const json& j, const std::string& where,
                       std::initializer_list<absl::string_view> allowed) {
  if (!j.is_object()) return Bad(where, "expected an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const absl::string_view a : allowed) known |= a == key;
    if (!known) return Bad(where, absl::StrCat("unknown key '", key, "'"));
  }
  return absl::OkStatus();
}

template <typename T>
absl::Status Read(const json& j, const char* key, const std::string& where,
                  T& out) {
  if (!j.contains(key)) return absl::OkStatus();
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    return Bad(absl::StrCat(where, ".", key),
               absl::StrCat("wrong type (got ", j.at(key).dump(), ")"));
  }
  return absl::OkStatus();
}

absl::StatusOr<ModelSpec> ParseModel(const json& j, const std::string& where) {
  RETURN_IF_ERROR(CheckKeys(j, where,
                            {"name", "kind", "n_estimators", "max_depth",
                             "learning_rate", "subsample", "bootstrap", "seed"}));
  ModelSpec m;
  std::string kind;
  RETURN_IF_ERROR(Read(j, "name", where, m.name));
  RETURN_IF_ERROR(Read(j, "kind", where, kind));
  if (m.name.empty()) return Bad(where, "missing name");
  ASSIGN_OR_RETURN(m.kind, ParseEnsembleKind(kind));
  if (m.kind == EnsembleKind::kRegression) {
    return Bad(where, "target models must be classifiers");
  }
  int n_estimators = -1, max_depth = -1;
  uint64_t seed = 0;
  RETURN_IF_ERROR(Read(j, "n_estimators", where, n_estimators));
  RETURN_IF_ERROR(Read(j, "max_depth", where, max_depth));
  RETURN_IF_ERROR(Read(j, "seed", where, seed));
  if (m.kind == EnsembleKind::kGradientBoosting) {
    if (n_estimators >= 0) m.boosting.n_estimators = n_estimators;
    if (max_depth >= 0) m.boosting.max_depth = max_depth;
    m.boosting.seed = seed;
    RETURN_IF_ERROR(Read(j, "learning_rate", where, m.boosting.learning_rate));
    RETURN_IF_ERROR(Read(j, "subsample", where, m.boosting.subsample));
    if (j.contains("bootstrap")) return Bad(where, "bootstrap is a forest option");
  } else {
    if (n_estimators >= 0) m.forest.n_estimators = n_estimators;
    if (max_depth >= 0) m.forest.max_depth = max_depth;
    m.forest.seed = seed;
    RETURN_IF_ERROR(Read(j, "bootstrap", where, m.forest.bootstrap));
    if (j.contains("learning_rate") || j.contains("subsample")) {
      return Bad(where, "learning_rate/subsample are boosting options");
    }
  }
  return m;
}

absl::StatusOr<std::vector<ModelSpec>> ParseModels(const json& doc,
                                                   const char* key) {
  std::vector<ModelSpec> out;
  if (!doc.contains(key)) return out;
  if (!doc.at(key).is_array()) return Bad(key, "expected an array");
  for (size_t i = 0; i < doc.at(key).size(); ++i) {
    ASSIGN_OR_RETURN(ModelSpec m,
                     ParseModel(doc.at(key)[i], absl::StrCat(key, "[", i, "]")));
    out.push_back(std::move(m));
  }
  return out;
}

absl::StatusOr<AttackSpec> ParseAttack(const json& j, const std::string& where) {
  AttackSpec a;
  std::string kind;
  RETURN_IF_ERROR(Read(j.is_object() ? j : json::object(), "kind", where, kind));
  if (kind == "boundary") {
    a.kind = AttackKind::kBoundary;
    RETURN_IF_ERROR(CheckKeys(
        j, where,
        {"name", "kind", "epsilon", "delta", "max_iter", "num_trials",
         "step_adaptation", "adaptation_factor", "max_init_steps",
         "similarity_threshold", "max_queries"}));
    BoundaryConfig& b = a.boundary;
    RETURN_IF_ERROR(Read(j, "epsilon", where, b.epsilon));
    RETURN_IF_ERROR(Read(j, "delta", where, b.delta));
    RETURN_IF_ERROR(Read(j, "max_iter", where, b.max_iter));
    RETURN_IF_ERROR(Read(j, "num_trials", where, b.num_trials));
    RETURN_IF_ERROR(Read(j, "step_adaptation", where, b.step_adaptation));
    RETURN_IF_ERROR(Read(j, "adaptation_factor", where, b.adaptation_factor));
    RETURN_IF_ERROR(Read(j, "max_init_steps", where, b.max_init_steps));
    RETURN_IF_ERROR(Read(j, "similarity_threshold", where, b.similarity_threshold));
    RETURN_IF_ERROR(Read(j, "max_queries", where, b.max_queries));
    RETURN_IF_ERROR(ValidateBoundaryConfig(b));
  } else if (kind == "hopskipjump") {
    a.kind = AttackKind::kHopSkipJump;
    RETURN_IF_ERROR(CheckKeys(
        j, where,
        {"name", "kind", "max_iter", "max_eval", "init_eval", "init_size",
         "search_tolerance", "max_step_halvings", "similarity_threshold",
         "max_queries"}));
    HsjConfig& h = a.hsj;
    RETURN_IF_ERROR(Read(j, "max_iter", where, h.max_iter));
    RETURN_IF_ERROR(Read(j, "max_eval", where, h.max_eval));
    RETURN_IF_ERROR(Read(j, "init_eval", where, h.init_eval));
    RETURN_IF_ERROR(Read(j, "init_size", where, h.init_size));
    RETURN_IF_ERROR(Read(j, "search_tolerance", where, h.search_tolerance));
    RETURN_IF_ERROR(Read(j, "max_step_halvings", where, h.max_step_halvings));
    RETURN_IF_ERROR(Read(j, "similarity_threshold", where, h.similarity_threshold));
    RETURN_IF_ERROR(Read(j, "max_queries", where, h.max_queries));
    RETURN_IF_ERROR(ValidateHsjConfig(h));
  } else if (kind == "transfer") {
    a.kind = AttackKind::kTransfer;
    RETURN_IF_ERROR(CheckKeys(j, where,
                              {"name", "kind", "selector", "source", "k", "n_corr",
                               "lambda_max_l0", "alpha_reg", "learning_rate",
                               "inner_steps"}));
    std::string selector = "random";
    RETURN_IF_ERROR(Read(j, "selector", where, selector));
    if (selector == "random") {
      a.selector = SelectorKind::kRandom;
    } else if (selector == "importance") {
      a.selector = SelectorKind::kImportance;
    } else {
      return Bad(where, absl::StrCat("unknown selector '", selector, "'"));
    }
    RETURN_IF_ERROR(Read(j, "source", where, a.source));
    if ((a.selector == SelectorKind::kImportance) == a.source.empty()) {
      return Bad(where, "source is required for, and only for, importance selection");
    }
    RETURN_IF_ERROR(Read(j, "k", where, a.k));
    RETURN_IF_ERROR(Read(j, "n_corr", where, a.n_corr));
    if (a.k < 1 || a.n_corr < 0) return Bad(where, "need k >= 1 and n_corr >= 0");
    TransferConfig& t = a.transfer;
    RETURN_IF_ERROR(Read(j, "lambda_max_l0", where, t.lambda_max_l0));
    RETURN_IF_ERROR(Read(j, "alpha_reg", where, t.alpha_reg));
    RETURN_IF_ERROR(Read(j, "learning_rate", where, t.learning_rate));
    RETURN_IF_ERROR(Read(j, "inner_steps", where, t.inner_steps));
    RETURN_IF_ERROR(ValidateTransferConfig(t));
  } else {
    return Bad(where, absl::StrCat("unknown attack kind '", kind, "'"));
  }
  RETURN_IF_ERROR(Read(j, "name", where, a.name));
  if (a.name.empty()) return Bad(where, "missing name");
  return a;
}

template <typename E, typename Parse>
absl::Status ReadEnumList(const json& j, const char* key, const std::string& where,
                          Parse parse, std::vector<E>& out) {
  std::vector<std::string> names;
  if (!j.contains(key)) return absl::OkStatus();
  RETURN_IF_ERROR(Read(j, key, where, names));
  out.clear();
  for (const std::string& n : names) {
    ASSIGN_OR_RETURN(E e, parse(n));
    if (std::find(out.begin(), out.end(), e) != out.end()) {
      return Bad(absl::StrCat(where, ".", key), absl::StrCat("duplicate '", n, "'"));
    }
    out.push_back(e);
  }
  return absl::OkStatus();
}

std::string Resolve(const std::string& base_dir, const std::string& p) {
  if (p.empty() || std::filesystem::path(p).is_absolute()) return p;
  return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

}  // namespace

absl::string_view AttackKindName(AttackKind k) {
  switch (k) {
    case AttackKind::kBoundary:
      return "boundary";
    case AttackKind::kHopSkipJump:
      return "hopskipjump";
    case AttackKind::kTransfer:
      return "transfer";
  }
  return "unknown";
}

absl::StatusOr<ExperimentConfig> ParseConfig(const json& doc,
                                             const std::string& base_dir) {
  RETURN_IF_ERROR(CheckKeys(
      doc, "config",
      {"seed", "data", "preprocess", "constraints", "dependents", "dependency_model", "models",
       "importance_sources", "surrogate", "attacks", "attack_set", "detectors",
       "shap", "stats", "effort", "output_dir"}));
  ExperimentConfig cfg;
  RETURN_IF_ERROR(Read(doc, "seed", "config", cfg.seed));
  RETURN_IF_ERROR(Read(doc, "output_dir", "config", cfg.output_dir));
  cfg.output_dir = Resolve(base_dir, cfg.output_dir);

  if (!doc.contains("data")) return Bad("config", "missing data block");
  const json& data = doc.at("data");
  RETURN_IF_ERROR(CheckKeys(data, "data", {"csv", "schema"}));
  RETURN_IF_ERROR(Read(data, "csv", "data", cfg.data_csv));
  RETURN_IF_ERROR(Read(data, "schema", "data", cfg.schema_path));
  if (cfg.data_csv.empty() || cfg.schema_path.empty()) {
    return Bad("data", "csv and schema are required");
  }
  cfg.data_csv = Resolve(base_dir, cfg.data_csv);
  cfg.schema_path = Resolve(base_dir, cfg.schema_path);

  if (doc.contains("preprocess")) {
    const json& p = doc.at("preprocess");
    RETURN_IF_ERROR(CheckKeys(p, "preprocess",
                              {"train_fraction", "attacker_fraction",
                               "drop_correlated_threshold", "oversample_minority"}));
    RETURN_IF_ERROR(Read(p, "train_fraction", "preprocess", cfg.train_fraction));
    RETURN_IF_ERROR(Read(p, "attacker_fraction", "preprocess", cfg.attacker_fraction));
    RETURN_IF_ERROR(Read(p, "drop_correlated_threshold", "preprocess",
                         cfg.drop_correlated_threshold));
    RETURN_IF_ERROR(Read(p, "oversample_minority", "preprocess", cfg.oversample_minority));
  }
  if (!(cfg.train_fraction > 0 && cfg.train_fraction < 1) ||
      !(cfg.attacker_fraction > 0 && cfg.attacker_fraction < 1)) {
    return Bad("preprocess", "fractions must lie in (0, 1)");
  }
  if (!(cfg.drop_correlated_threshold >= 0 && cfg.drop_correlated_threshold <= 1)) {
    return Bad("preprocess", "drop_correlated_threshold must lie in [0, 1]");
  }

  RETURN_IF_ERROR(Read(doc, "dependents", "config", cfg.dependents));
  if (doc.contains("dependency_model")) {
    json spec = doc.at("dependency_model");
    if (!spec.is_object()) return Bad("dependency_model", "expected an object");
    spec["name"] = "dependency_model";
    spec["kind"] = "gradient_boosting";
    ASSIGN_OR_RETURN(const ModelSpec m, ParseModel(spec, "dependency_model"));
    cfg.dependency_model = m.boosting;
  }

  ASSIGN_OR_RETURN(cfg.models, ParseModels(doc, "models"));
  ASSIGN_OR_RETURN(cfg.importance_sources, ParseModels(doc, "importance_sources"));
  if (cfg.models.empty()) return Bad("models", "at least one target model is required");

  if (doc.contains("surrogate")) {
    const json& s = doc.at("surrogate");
    RETURN_IF_ERROR(CheckKeys(s, "surrogate",
                              {"embed_hidden", "activation", "head_width", "dropout",
                               "epochs", "learning_rate", "weight_decay", "patience",
                               "batch_size", "validation_fraction", "seed"}));
    RETURN_IF_ERROR(Read(s, "embed_hidden", "surrogate", cfg.surrogate_arch.embed_hidden));
    std::string act = std::string(ActivationName(cfg.surrogate_arch.activation));
    RETURN_IF_ERROR(Read(s, "activation", "surrogate", act));
    ASSIGN_OR_RETURN(cfg.surrogate_arch.activation, ParseActivation(act));
    RETURN_IF_ERROR(Read(s, "head_width", "surrogate", cfg.surrogate_arch.head_width));
    RETURN_IF_ERROR(Read(s, "dropout", "surrogate", cfg.surrogate_arch.dropout));
    TrainConfig& t = cfg.surrogate_train;
    RETURN_IF_ERROR(Read(s, "epochs", "surrogate", t.epochs));
    RETURN_IF_ERROR(Read(s, "learning_rate", "surrogate", t.learning_rate));
    RETURN_IF_ERROR(Read(s, "weight_decay", "surrogate", t.weight_decay));
    RETURN_IF_ERROR(Read(s, "patience", "surrogate", t.patience));
    RETURN_IF_ERROR(Read(s, "batch_size", "surrogate", t.batch_size));
    RETURN_IF_ERROR(Read(s, "validation_fraction", "surrogate", t.validation_fraction));
    RETURN_IF_ERROR(Read(s, "seed", "surrogate", t.seed));
    RETURN_IF_ERROR(ValidateTrainConfig(t));
  }

  if (!doc.contains("attacks") || !doc.at("attacks").is_array()) {
    return Bad("attacks", "expected an array");
  }
  for (size_t i = 0; i < doc.at("attacks").size(); ++i) {
    ASSIGN_OR_RETURN(AttackSpec a, ParseAttack(doc.at("attacks")[i],
                                               absl::StrCat("attacks[", i, "]")));
    cfg.attacks.push_back(std::move(a));
  }
  if (cfg.attacks.empty()) return Bad("attacks", "at least one attack is required");

  if (doc.contains("attack_set")) {
    const json& a = doc.at("attack_set");
    RETURN_IF_ERROR(CheckKeys(a, "attack_set", {"per_class_count", "filter_by_surrogate"}));
    RETURN_IF_ERROR(Read(a, "per_class_count", "attack_set", cfg.per_class_count));
    RETURN_IF_ERROR(Read(a, "filter_by_surrogate", "attack_set", cfg.filter_by_surrogate));
  }
  if (cfg.per_class_count < 1) return Bad("attack_set", "per_class_count must be >= 1");

  if (doc.contains("detectors")) {
    const json& d = doc.at("detectors");
    RETURN_IF_ERROR(CheckKeys(d, "detectors",
                              {"kinds", "modes", "psi", "n_trees", "min_class_size",
                               "validation_fraction", "default_if_fpr", "ae_epochs",
                               "ae_learning_rate", "ae_patience"}));
    RETURN_IF_ERROR(ReadEnumList(d, "kinds", "detectors", ParseDetectorKind,
                                 cfg.detector_kinds));
    RETURN_IF_ERROR(ReadEnumList(d, "modes", "detectors", ParseDetectionMode,
                                 cfg.detector_modes));
    RETURN_IF_ERROR(Read(d, "psi", "detectors", cfg.bank.forest.psi));
    RETURN_IF_ERROR(Read(d, "n_trees", "detectors", cfg.bank.forest.n_trees));
    RETURN_IF_ERROR(Read(d, "min_class_size", "detectors", cfg.bank.min_samples));
    RETURN_IF_ERROR(Read(d, "validation_fraction", "detectors",
                         cfg.bank.validation_fraction));
    RETURN_IF_ERROR(Read(d, "default_if_fpr", "detectors", cfg.bank.default_if_fpr));
    RETURN_IF_ERROR(Read(d, "ae_epochs", "detectors", cfg.bank.ae.epochs));
    RETURN_IF_ERROR(Read(d, "ae_learning_rate", "detectors", cfg.bank.ae.learning_rate));
    RETURN_IF_ERROR(Read(d, "ae_patience", "detectors", cfg.bank.ae.patience));
    RETURN_IF_ERROR(ValidateTrainConfig(cfg.bank.ae));
  }
  if (cfg.bank.forest.psi < 2 || cfg.bank.forest.n_trees < 1 || cfg.bank.min_samples < 2) {
    return Bad("detectors", "need psi >= 2, n_trees >= 1, min_class_size >= 2");
  }
  if (doc.contains("shap")) {
    RETURN_IF_ERROR(CheckKeys(doc.at("shap"), "shap", {"modes"}));
    RETURN_IF_ERROR(ReadEnumList(doc.at("shap"), "modes", "shap", ParseDetectionMode,
                                 cfg.shap_modes));
  }
  if (doc.contains("constraints")) {
    const json& k = doc.at("constraints");
    RETURN_IF_ERROR(CheckKeys(k, "constraints", {"clamp_quantiles"}));
    std::vector<double> q;
    RETURN_IF_ERROR(Read(k, "clamp_quantiles", "constraints", q));
    if (k.contains("clamp_quantiles")) {
      if (q.size() != 2 || !(q[0] >= 0 && q[0] <= q[1] && q[1] <= 1)) {
        return Bad("constraints", "clamp_quantiles must be [lo, hi] with 0 <= lo <= hi <= 1");
      }
      cfg.clamp_quantiles = std::make_pair(q[0], q[1]);
    }
  }
  if (doc.contains("stats")) {
    RETURN_IF_ERROR(CheckKeys(doc.at("stats"), "stats", {"enabled", "mcnemar_effect"}));
    RETURN_IF_ERROR(Read(doc.at("stats"), "enabled", "stats", cfg.stats));
    RETURN_IF_ERROR(Read(doc.at("stats"), "mcnemar_effect", "stats", cfg.mcnemar_effect));
    if (cfg.mcnemar_effect != "g" && cfg.mcnemar_effect != "doubled_g") {
      return Bad("stats", "mcnemar_effect must be \"g\" or \"doubled_g\"");
    }
  }
  if (doc.contains("effort")) {
    RETURN_IF_ERROR(CheckKeys(doc.at("effort"), "effort", {"alpha_q"}));
    RETURN_IF_ERROR(Read(doc.at("effort"), "alpha_q", "effort", cfg.effort_alpha_q));
    if (!(cfg.effort_alpha_q >= 0)) return Bad("effort", "alpha_q must be >= 0");
  }
  return cfg;
}

absl::StatusOr<ExperimentConfig> LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open config ", path));
  std::stringstream buf;
  buf << in.rdbuf();
  const json doc = json::parse(buf.str(), nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) {
    return absl::InvalidArgumentError(absl::StrCat("config ", path, " is not valid JSON"));
  }
  return ParseConfig(doc, std::filesystem::path(path).parent_path().string());
}

absl::Status ValidateConfig(const ExperimentConfig& cfg, const Schema& schema) {
  std::set<std::string> feature_names;
  for (const FeatureSpec& f : schema.features) feature_names.insert(f.name);
  for (const std::string& d : cfg.dependents) {
    if (!feature_names.count(d)) {
      return Bad("dependents", absl::StrCat("feature '", d, "' is not in the schema"));
    }
  }
  std::set<std::string> seen;
  for (const ModelSpec& m : cfg.models) {
    if (!seen.insert(m.name).second) {
      return Bad("models", absl::StrCat("duplicate name '", m.name, "'"));
    }
  }
  std::set<std::string> sources;
  for (const ModelSpec& m : cfg.importance_sources) {
    if (!sources.insert(m.name).second) {
      return Bad("importance_sources", absl::StrCat("duplicate name '", m.name, "'"));
    }
  }
  seen.clear();
  for (const AttackSpec& a : cfg.attacks) {
    if (!seen.insert(a.name).second) {
      return Bad("attacks", absl::StrCat("duplicate name '", a.name, "'"));
    }
    if (a.selector == SelectorKind::kImportance && !sources.count(a.source)) {
      return Bad("attacks", absl::StrCat("attack '", a.name, "' names unknown source '",
                                         a.source, "'"));
    }
  }
  if (schema.n_classes != 2) return Bad("data", "only binary tasks are supported");
  return absl::OkStatus();
}

}  // namespace tabadv
