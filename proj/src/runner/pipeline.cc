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

#include "tabadv/runner/pipeline.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>

#include "absl/strings/str_cat.h"
#include "tabadv/attacks/black_box.h"
#include "tabadv/attacks/query_attacks.h"
#include "tabadv/attacks/transfer.h"
#include "tabadv/coherence/constraints.h"
#include "tabadv/common/parallel.h"
#include "tabadv/common/random.h"
#include "tabadv/common/status_macros.h"
#include "tabadv/csad/detectors.h"
#include "tabadv/runner/report.h"
#include "tabadv/schema/dataset_io.h"
#include "tabadv/schema/preprocess.h"
#include "tabadv/shap/tree_shap.h"
#include "tabadv/stats/stats.h"

namespace tabadv {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

absl::StatusOr<ConstraintSet> BuildConstraints(const ExperimentConfig& cfg,
                                               const PreparedData& data) {
  ConstraintSet c = ConstraintSet::FromSchema(data.schema);
  if (cfg.clamp_quantiles) {
    RETURN_IF_ERROR(ApplyPercentileClamps(data.attacker_train, cfg.clamp_quantiles->first,
                                          cfg.clamp_quantiles->second, &c));
  }
  return c;
}

double Accuracy(const Classifier& m, const Dataset& ds) {
  if (ds.rows.empty()) return 0.0;
  int hit = 0;
  for (size_t i = 0; i < ds.rows.size(); ++i) hit += m.Label(ds.rows[i]) == ds.labels[i];
  return static_cast<double>(hit) / ds.rows.size();
}

absl::StatusOr<TreeEnsemble> FitModel(const ModelSpec& spec, const Dataset& train,
                                      uint64_t seed) {
  if (spec.kind == EnsembleKind::kGradientBoosting) {
    BoostingParams p = spec.boosting;
    p.seed = seed;
    return FitGradientBoosting(train.rows, train.labels, p);
  }
  ForestParams p = spec.forest;
  p.seed = seed;
  return FitRandomForest(train.rows, train.labels, p);
}

// Linear-interpolation quantile of sorted values.
double Quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * (sorted.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - lo) * (sorted[hi] - sorted[lo]);
}

json Distribution(const std::vector<double>& raw) {
  json j = {{"raw", raw}};
  if (raw.empty()) {
    for (const char* k : {"min", "q1", "median", "q3", "max", "mean"}) j[k] = nullptr;
    return j;
  }
  std::vector<double> s = raw;
  std::sort(s.begin(), s.end());
  double sum = 0.0;
  for (const double v : s) sum += v;
  j["min"] = s.front();
  j["q1"] = Quantile(s, 0.25);
  j["median"] = Quantile(s, 0.5);
  j["q3"] = Quantile(s, 0.75);
  j["max"] = s.back();
  j["mean"] = sum / s.size();
  return j;
}

json Optional(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

absl::string_view NoteName(RunNote n) {
  switch (n) {
    case RunNote::kNone:
      return "";
    case RunNote::kInitFailed:
      return "init_failed";
    case RunNote::kInvalidStart:
      return "invalid_start";
  }
  return "";
}

absl::StatusOr<RunNote> ParseNote(absl::string_view s) {
  for (const RunNote n : {RunNote::kNone, RunNote::kInitFailed, RunNote::kInvalidStart}) {
    if (NoteName(n) == s) return n;
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown run note '", s, "'"));
}

json StageSeeds(uint64_t master) {
  json j = json::object();
  for (const char* s : {"split", "attacker-split", "drop-correlated", "surrogate",
                        "dependency", "detectors"}) {
    j[s] = DeriveSeed(master, s);
  }
  return j;
}

}  // namespace

absl::StatusOr<PreparedData> PrepareData(const ExperimentConfig& cfg) {
  PreparedData out;
  ASSIGN_OR_RETURN(Schema schema, LoadSchemaFile(cfg.schema_path));
  RETURN_IF_ERROR(TagStage(Stage::kConfig, ValidateConfig(cfg, schema)));
  for (FeatureSpec& f : schema.features) {
    if (std::find(cfg.dependents.begin(), cfg.dependents.end(), f.name) !=
        cfg.dependents.end()) {
      f.dependent = true;
    }
  }
  RETURN_IF_ERROR(ValidateSchema(schema));
  ASSIGN_OR_RETURN(Dataset ds, LoadCsv(cfg.data_csv, schema));
  out.total_rows = static_cast<int>(ds.size());
  if (cfg.drop_correlated_threshold > 0.0) {
    ASSIGN_OR_RETURN(DropCorrelatedResult dropped,
                     DropCorrelated(ds, cfg.drop_correlated_threshold,
                                    DeriveSeed(cfg.seed, "drop-correlated")));
    for (const std::string& name : dropped.dropped) {
      if (std::find(cfg.dependents.begin(), cfg.dependents.end(), name) !=
          cfg.dependents.end()) {
        return absl::InvalidArgumentError(
            absl::StrCat("dependent feature '", name, "' was dropped as correlated"));
      }
    }
    out.dropped_features = dropped.dropped;
    ds = std::move(dropped.dataset);
  }
  ASSIGN_OR_RETURN(auto split,
                   TrainTestSplit(ds, cfg.train_fraction, DeriveSeed(cfg.seed, "split")));
  Dataset train = std::move(split.first);
  out.test = std::move(split.second);
  if (cfg.oversample_minority) {
    const std::vector<size_t> counts = train.ClassCounts();
    const int minority = counts[0] <= counts[1] ? 0 : 1;
    const size_t before = train.size();
    ASSIGN_OR_RETURN(train, OversampleMinority(train, minority));
    out.oversampled_rows = static_cast<int>(train.size() - before);
  }
  ASSIGN_OR_RETURN(auto owners, TrainTestSplit(train, 1.0 - cfg.attacker_fraction,
                                               DeriveSeed(cfg.seed, "attacker-split")));
  out.target_train = std::move(owners.first);
  out.attacker_train = std::move(owners.second);
  out.schema = ds.schema;
  for (const Dataset* part : {&out.test, &out.target_train, &out.attacker_train}) {
    const std::vector<size_t> counts = part->ClassCounts();
    if (std::find(counts.begin(), counts.end(), 0u) != counts.end()) {
      return absl::FailedPreconditionError("a data split is missing a class");
    }
  }
  return out;
}

absl::StatusOr<TrainedModels> TrainModels(const ExperimentConfig& cfg,
                                          const PreparedData& data) {
  TrainedModels out;
  ModelArchive& a = out.archive;
  a.schema = data.schema;
  json models = json::object();
  for (const ModelSpec& spec : cfg.models) {
    ASSIGN_OR_RETURN(TreeEnsemble m,
                     FitModel(spec, data.target_train,
                              DeriveSeed(cfg.seed, "model/" + spec.name,
                                         spec.kind == EnsembleKind::kGradientBoosting
                                             ? spec.boosting.seed
                                             : spec.forest.seed)));
    models[spec.name] = {{"kind", EnsembleKindName(spec.kind)},
                         {"train_accuracy", Accuracy(m, data.target_train)},
                         {"test_accuracy", Accuracy(m, data.test)},
                         {"trees", m.trees().size()}};
    a.targets.emplace(spec.name, std::move(m));
  }
  for (const ModelSpec& spec : cfg.importance_sources) {
    ASSIGN_OR_RETURN(TreeEnsemble m,
                     FitModel(spec, data.attacker_train,
                              DeriveSeed(cfg.seed, "source/" + spec.name,
                                         spec.kind == EnsembleKind::kGradientBoosting
                                             ? spec.boosting.seed
                                             : spec.forest.seed)));
    a.importance_sources.emplace(spec.name, std::move(m));
  }
  const bool needs_surrogate =
      std::any_of(cfg.attacks.begin(), cfg.attacks.end(),
                  [](const AttackSpec& s) { return !s.is_query(); });
  json surrogate = nullptr;
  if (needs_surrogate) {
    TrainConfig tc = cfg.surrogate_train;
    tc.seed = DeriveSeed(cfg.seed, "surrogate", tc.seed);
    TrainReport report;
    const Clock::time_point start = Clock::now();
    ASSIGN_OR_RETURN(a.surrogate,
                     TrainSurrogate(data.attacker_train.rows, data.attacker_train.labels,
                                    cfg.surrogate_arch, tc, &report));
    out.surrogate_seconds = Seconds(start);
    surrogate = {{"train_accuracy", Accuracy(*a.surrogate, data.attacker_train)},
                 {"test_accuracy", Accuracy(*a.surrogate, data.test)},
                 {"epochs_run", report.epochs_run},
                 {"best_epoch", report.best_epoch},
                 {"best_validation_loss", report.best_validation_loss}};
  }
  std::vector<int> dependents;
  for (size_t j = 0; j < data.schema.features.size(); ++j) {
    if (data.schema.features[j].dependent) dependents.push_back(static_cast<int>(j));
  }
  BoostingParams dp = cfg.dependency_model;
  dp.seed = DeriveSeed(cfg.seed, "dependency", dp.seed);
  ASSIGN_OR_RETURN(a.registry, FitDependencyModels(data.attacker_train, dependents, dp));
  json dependency = json::object();
  for (const auto& [feature, model] : a.registry.models()) {
    // Held-out fit on the test rows.
    double ss_res = 0.0, ss_tot = 0.0, mean = 0.0;
    for (const Vec& r : data.test.rows) mean += r[feature];
    mean /= data.test.size();
    for (const Vec& r : data.test.rows) {
      const double e = r[feature] - a.registry.Predict(feature, r);
      ss_res += e * e;
      ss_tot += (r[feature] - mean) * (r[feature] - mean);
    }
    dependency[data.schema.features[feature].name] = {
        {"test_r2", ss_tot > 0 ? 1.0 - ss_res / ss_tot : 0.0}};
  }
  out.summary = {{"targets", std::move(models)},
                 {"surrogate", std::move(surrogate)},
                 {"dependency_models", std::move(dependency)}};
  return out;
}

absl::StatusOr<AttackResults> RunAttacks(const ExperimentConfig& cfg,
                                         const PreparedData& data,
                                         const ModelArchive& archive, int jobs) {
  AttackResults out;
  out.attack_sets = json::object();
  ASSIGN_OR_RETURN(const ConstraintSet c, BuildConstraints(cfg, data));
  const NormalInit init = NormalInit::Fit(data.attacker_train.rows);
  const std::vector<bool> eligible = EligibleFeatures(data.schema);
  const std::vector<Vec> corr = MutableCorrelationTable(data.attacker_train);
  std::map<std::string, FeatureSelector> selectors;
  for (const AttackSpec& spec : cfg.attacks) {
    if (spec.is_query()) continue;
    if (spec.selector == SelectorKind::kRandom) {
      selectors.emplace(spec.name,
                        FeatureSelector::Random(eligible, corr, spec.k, spec.n_corr));
      continue;
    }
    const auto it = archive.importance_sources.find(spec.source);
    if (it == archive.importance_sources.end()) {
      return absl::NotFoundError(absl::StrCat("importance source '", spec.source,
                                              "' missing from the model archive"));
    }
    ASSIGN_OR_RETURN(Vec importance, MeanAbsShap(it->second, data.attacker_train.rows));
    selectors.emplace(spec.name, FeatureSelector::Importance(eligible, corr,
                                                             std::move(importance),
                                                             spec.k, spec.n_corr));
  }
  const SurrogateModel* surrogate = archive.surrogate ? &*archive.surrogate : nullptr;

  for (const ModelSpec& mspec : cfg.models) {
    const auto it = archive.targets.find(mspec.name);
    if (it == archive.targets.end()) {
      return absl::NotFoundError(
          absl::StrCat("model '", mspec.name, "' missing from the model archive"));
    }
    const TreeEnsemble& target = it->second;
    ASSIGN_OR_RETURN(
        const AttackSet set,
        BuildAttackSet(data.test, target, cfg.filter_by_surrogate ? surrogate : nullptr,
                       cfg.per_class_count, DeriveSeed(cfg.seed, "attack-set/" + mspec.name)));
    out.attack_sets[mspec.name] = {{"retention_rate", set.retention_rate},
                                   {"eligible_per_class", set.eligible_per_class},
                                   {"drawn_per_class", set.drawn_per_class},
                                   {"shortfall", set.shortfall},
                                   {"size", set.data.size()}};
    for (const AttackSpec& spec : cfg.attacks) {
      if (!spec.is_query() && !surrogate) {
        return absl::FailedPreconditionError("transfer attack without a surrogate");
      }
      CellLedger cell;
      cell.attack = spec.name;
      cell.model = mspec.name;
      cell.kind = spec.kind;
      const size_t n = set.data.size();
      cell.sample_ids = set.source_rows;
      cell.labels = set.data.labels;
      cell.iterations.assign(n, 0);
      cell.notes.assign(n, RunNote::kNone);
      cell.l2_traces.resize(n);
      cell.entries.resize(n);
      const std::string stage = absl::StrCat("attack/", mspec.name, "/", spec.name);
      RETURN_IF_ERROR(ParallelFor(n, jobs, [&](size_t i) -> absl::Status {
        const Vec& x = set.data.rows[i];
        const int y = set.data.labels[i];
        Rng rng(DeriveSeed(cfg.seed, stage, set.source_rows[i]));
        BlackBoxHandle handle(target);
        LedgerEntry& e = cell.entries[i];
        e.x = x;
        e.x_adv = x;
        const Clock::time_point start = Clock::now();
        absl::Status status;
        if (spec.is_query()) {
          absl::StatusOr<AttackOutcome> r =
              spec.kind == AttackKind::kBoundary
                  ? BoundaryAttack(handle, x, y, spec.boundary, init, c, archive.registry, rng)
                  : HopSkipJumpAttack(handle, x, y, spec.hsj, init, c, archive.registry, rng);
          if (r.ok()) {
            e.target_success = r->success;
            if (r->success) e.x_adv = r->x_adv;
            cell.iterations[i] = r->iterations;
            cell.l2_traces[i] = r->l2_trace;
          }
          status = r.status();
        } else {
          absl::StatusOr<TransferOutcome> r =
              TransferAttack(*surrogate, handle, x, y, spec.transfer,
                             selectors.at(spec.name), c, archive.registry, rng);
          if (r.ok()) {
            e.surrogate_success = r->surrogate_success;
            e.target_success = r->transfer_success;
            e.x_adv = r->attack.x_adv;
            cell.iterations[i] = r->attack.iterations;
          }
          status = r.status();
        }
        e.queries = handle.queries();
        e.wall_seconds = Seconds(start);
        if (IsInitFailed(status)) {
          cell.notes[i] = RunNote::kInitFailed;
          return absl::OkStatus();
        }
        if (IsInvalidStart(status)) {
          cell.notes[i] = RunNote::kInvalidStart;
          return absl::OkStatus();
        }
        if (!status.ok()) {
          return absl::Status(status.code(),
                              absl::StrCat(stage, " sample ", set.source_rows[i], ": ",
                                           status.message()));
        }
        return absl::OkStatus();
      }));
      out.cells.push_back(std::move(cell));
    }
  }
  return out;
}

json LedgersToJson(const AttackResults& r) {
  json cells = json::array();
  for (const CellLedger& c : r.cells) {
    json rows = json::array();
    for (size_t i = 0; i < c.entries.size(); ++i) {
      const LedgerEntry& e = c.entries[i];
      rows.push_back({{"sample_id", c.sample_ids[i]},
                      {"y", c.labels[i]},
                      {"x", e.x},
                      {"x_adv", e.x_adv},
                      {"surrogate_success", e.surrogate_success},
                      {"target_success", e.target_success},
                      {"queries", e.queries},
                      {"iterations", c.iterations[i]},
                      {"note", NoteName(c.notes[i])},
                      {"l2_trace", c.l2_traces[i]},
                      {"wall_seconds", e.wall_seconds}});
    }
    cells.push_back({{"attack", c.attack},
                     {"model", c.model},
                     {"kind", AttackKindName(c.kind)},
                     {"rows", std::move(rows)}});
  }
  return {{"ledger_version", 1}, {"attack_sets", r.attack_sets}, {"cells", std::move(cells)}};
}

absl::StatusOr<AttackResults> LedgersFromJson(const json& j) {
  AttackResults r;
  try {
    if (j.at("ledger_version").get<int>() != 1) {
      return absl::InvalidArgumentError("unsupported ledger version");
    }
    r.attack_sets = j.at("attack_sets");
    for (const json& jc : j.at("cells")) {
      CellLedger c;
      c.attack = jc.at("attack").get<std::string>();
      c.model = jc.at("model").get<std::string>();
      const std::string kind = jc.at("kind").get<std::string>();
      bool known = false;
      for (const AttackKind k :
           {AttackKind::kBoundary, AttackKind::kHopSkipJump, AttackKind::kTransfer}) {
        if (AttackKindName(k) == kind) c.kind = k, known = true;
      }
      if (!known) return absl::InvalidArgumentError("unknown attack kind in ledger");
      for (const json& row : jc.at("rows")) {
        LedgerEntry e;
        e.x = row.at("x").get<Vec>();
        e.x_adv = row.at("x_adv").get<Vec>();
        e.surrogate_success = row.at("surrogate_success").get<bool>();
        e.target_success = row.at("target_success").get<bool>();
        e.queries = row.at("queries").get<int64_t>();
        e.wall_seconds = row.at("wall_seconds").get<double>();
        c.sample_ids.push_back(row.at("sample_id").get<size_t>());
        c.labels.push_back(row.at("y").get<int>());
        c.iterations.push_back(row.at("iterations").get<int>());
        ASSIGN_OR_RETURN(const RunNote note, ParseNote(row.at("note").get<std::string>()));
        c.notes.push_back(note);
        c.l2_traces.push_back(row.at("l2_trace").get<std::vector<double>>());
        c.entries.push_back(std::move(e));
      }
      r.cells.push_back(std::move(c));
    }
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("malformed ledgers: ", e.what()));
  }
  return r;
}

absl::StatusOr<json> Evaluate(const ExperimentConfig& cfg, const PreparedData& data,
                              const TrainedModels& models, const AttackResults& attacks,
                              int jobs) {
  const ModelArchive& archive = models.archive;
  ASSIGN_OR_RETURN(const ConstraintSet c, BuildConstraints(cfg, data));
  json report;
  report["schema_version"] = kReportSchemaVersion;
  report["environment"] = {{"tool_version", kToolVersion},
                           {"master_seed", cfg.seed},
                           {"stage_seeds", StageSeeds(cfg.seed)},
                           {"compiler", __VERSION__}};
  json attack_list = json::array();
  for (const AttackSpec& a : cfg.attacks) {
    attack_list.push_back({{"name", a.name},
                           {"kind", AttackKindName(a.kind)},
                           {"family", a.is_query() ? "query" : "transfer"},
                           {"selector", a.is_query() ? json(nullptr)
                                        : a.selector == SelectorKind::kRandom
                                            ? json("random")
                                            : json("importance")},
                           {"source", a.source.empty() ? json(nullptr) : json(a.source)}});
  }
  json model_list = json::array();
  for (const ModelSpec& m : cfg.models) model_list.push_back(m.name);
  json kinds = json::array(), modes = json::array(), shap_modes = json::array();
  for (const DetectorKind k : cfg.detector_kinds) kinds.push_back(DetectorKindName(k));
  for (const DetectionMode m : cfg.detector_modes) modes.push_back(DetectionModeName(m));
  for (const DetectionMode m : cfg.shap_modes) shap_modes.push_back(DetectionModeName(m));
  report["config"] = {{"models", model_list},
                      {"attacks", attack_list},
                      {"detector_kinds", kinds},
                      {"detector_modes", modes},
                      {"shap_modes", shap_modes},
                      {"per_class_count", cfg.per_class_count},
                      {"stats_enabled", cfg.stats},
                      {"mcnemar_effect", cfg.mcnemar_effect},
                      {"clamp_quantiles",
                       cfg.clamp_quantiles ? json::array({cfg.clamp_quantiles->first,
                                                          cfg.clamp_quantiles->second})
                                           : json(nullptr)}};
  json dropped = data.dropped_features;
  report["data"] = {{"rows", data.total_rows},
                    {"features", data.schema.features.size()},
                    {"dropped_features", dropped},
                    {"oversampled_rows", data.oversampled_rows},
                    {"target_train_rows", data.target_train.size()},
                    {"attacker_train_rows", data.attacker_train.size()},
                    {"test_rows", data.test.size()}};
  report["models"] = models.summary;
  report["attack_sets"] = attacks.attack_sets;

  // Detector banks on the target owner's benign training rows. IF banks are
  // calibrated to the AE banks' validation FPRs when both kinds are enabled.
  std::map<std::pair<DetectorKind, DetectionMode>, DetectorBank> banks;
  json detectors = json::object();
  const bool has_ae = std::count(cfg.detector_kinds.begin(), cfg.detector_kinds.end(),
                                 DetectorKind::kAutoencoder) > 0;
  std::vector<DetectorKind> order;
  if (has_ae) order.push_back(DetectorKind::kAutoencoder);
  for (const DetectorKind k : cfg.detector_kinds) {
    if (k != DetectorKind::kAutoencoder) order.push_back(k);
  }
  for (const DetectorKind kind : order) {
    for (const DetectionMode mode : cfg.detector_modes) {
      BankConfig bc = cfg.bank;
      bc.seed = DeriveSeed(cfg.seed, "detectors", static_cast<int>(mode));
      bc.forest.seed = DeriveSeed(cfg.seed, "detectors/forest", static_cast<int>(mode));
      if (kind == DetectorKind::kIsolationForest && has_ae) {
        bc.if_target_fpr =
            banks.at({DetectorKind::kAutoencoder, mode}).ValidationFprs();
      }
      ASSIGN_OR_RETURN(DetectorBank bank, FitBank(data.target_train, kind, mode, bc));
      json thresholds = json::array();
      for (const Detector& d : bank.detectors()) thresholds.push_back(d.threshold);
      detectors[std::string(DetectorKindName(kind))][std::string(DetectionModeName(mode))] = {
          {"validation_fpr", bank.ValidationFprs()}, {"thresholds", thresholds}};
      banks.emplace(std::make_pair(kind, mode), std::move(bank));
    }
  }
  report["detectors"] = detectors;

  // Benign SHAP ranges per target model and mode, keyed by predicted class.
  std::map<std::string, std::map<DetectionMode, ShapRangeTable>> tables;
  for (const ModelSpec& m : cfg.models) {
    const TreeEnsemble& target = archive.targets.at(m.name);
    std::vector<Vec> phis(data.target_train.size());
    std::vector<int> predicted(data.target_train.size());
    RETURN_IF_ERROR(ParallelFor(phis.size(), jobs, [&](size_t i) -> absl::Status {
      ASSIGN_OR_RETURN(ShapExplanation e, TreeShap(target, data.target_train.rows[i]));
      phis[i] = std::move(e.attributions);
      predicted[i] = target.Label(data.target_train.rows[i]);
      return absl::OkStatus();
    }));
    for (const DetectionMode mode : cfg.shap_modes) {
      ASSIGN_OR_RETURN(tables[m.name][mode],
                       BuildRangeTable(phis, predicted, data.schema.n_classes, mode));
    }
  }

  json cells = json::array();
  json timing_cells = json::array();
  std::map<std::string, double> query_time;
  for (const ModelSpec& m : cfg.models) {
    const TreeEnsemble& target = archive.targets.at(m.name);
    const int reps = 2000;
    const Clock::time_point start = Clock::now();
    int sink = 0;
    for (int r = 0; r < reps; ++r) sink += target.Label(data.test.rows[r % data.test.size()]);
    query_time[m.name] = Seconds(start) / reps + 0.0 * sink;
  }
  for (const CellLedger& cell : attacks.cells) {
    const auto target_it = archive.targets.find(cell.model);
    if (target_it == archive.targets.end()) {
      return absl::NotFoundError(absl::StrCat("ledger names unknown model ", cell.model));
    }
    const TreeEnsemble& target = target_it->second;
    const bool query = cell.kind != AttackKind::kTransfer;
    ASSIGN_OR_RETURN(const SuccessRates rates,
                     ComputeSuccessRates(cell.entries, query ? AttackFamily::kQuery
                                                             : AttackFamily::kTransfer));
    ASSIGN_OR_RETURN(const QueryStats qs, ComputeQueryStats(cell.entries));
    std::vector<size_t> hits;
    for (size_t i = 0; i < cell.entries.size(); ++i) {
      if (cell.entries[i].target_success) hits.push_back(i);
    }
    std::vector<double> l0, l2, queries;
    std::vector<int> hit_ids, predicted;
    std::vector<Vec> adversarials;
    int violations = 0, still_correct = 0;
    for (const LedgerEntry& e : cell.entries) queries.push_back(e.queries);
    for (const size_t i : hits) {
      const LedgerEntry& e = cell.entries[i];
      ASSIGN_OR_RETURN(const int z, L0(e.x, e.x_adv, data.schema.features));
      ASSIGN_OR_RETURN(const double d, L2(e.x, e.x_adv));
      l0.push_back(z);
      l2.push_back(d);
      hit_ids.push_back(static_cast<int>(cell.sample_ids[i]));
      const int label = target.Label(e.x_adv);
      predicted.push_back(label);
      still_correct += label == cell.labels[i];
      violations += !CheckConstraints(e.x, e.x_adv, c).ok();
      adversarials.push_back(e.x_adv);
    }
    json detection = json::object();
    for (const auto& [key, bank] : banks) {
      std::vector<int> flags;
      for (size_t h = 0; h < adversarials.size(); ++h) {
        ASSIGN_OR_RETURN(const bool f, bank.IsAnomalous(adversarials[h], predicted[h]));
        flags.push_back(f);
      }
      const int flagged = std::count(flags.begin(), flags.end(), 1);
      detection[std::string(DetectorKindName(key.first))]
               [std::string(DetectionModeName(key.second))] = {
                   {"flagged", flagged},
                   {"rate", flags.empty() ? json(nullptr)
                                          : json(static_cast<double>(flagged) / flags.size())},
                   {"flags", flags}};
    }
    std::vector<Vec> phis(adversarials.size());
    RETURN_IF_ERROR(ParallelFor(phis.size(), jobs, [&](size_t h) -> absl::Status {
      ASSIGN_OR_RETURN(ShapExplanation e, TreeShap(target, adversarials[h]));
      phis[h] = std::move(e.attributions);
      return absl::OkStatus();
    }));
    json importance = json::object();
    for (const auto& [mode, table] : tables.at(cell.model)) {
      std::vector<int> counts;
      for (size_t h = 0; h < phis.size(); ++h) {
        counts.push_back(CountOutOfRange(table, phis[h], predicted[h]));
      }
      json block = {{"counts", counts}, {"rate", nullptr}, {"avg_count", nullptr}};
      if (!phis.empty()) {
        ASSIGN_OR_RETURN(const ImportanceAnomalyReport r,
                         ImportanceAnomaly(table, phis, predicted));
        block["rate"] = r.rate;
        block["avg_count"] = r.avg_count;
      }
      importance[std::string(DetectionModeName(mode))] = std::move(block);
    }
    int init_failed = 0, invalid_start = 0, trace_violations = 0;
    for (const RunNote n : cell.notes) {
      init_failed += n == RunNote::kInitFailed;
      invalid_start += n == RunNote::kInvalidStart;
    }
    // Boundary traces must strictly decrease, HopSkipJump traces must not grow.
    for (const std::vector<double>& t : cell.l2_traces) {
      trace_violations +=
          cell.kind == AttackKind::kBoundary
              ? std::adjacent_find(t.begin(), t.end(), std::less_equal<double>()) != t.end()
              : std::adjacent_find(t.begin(), t.end(), std::less<double>()) != t.end();
    }
    cells.push_back(
        {{"attack", cell.attack},
         {"model", cell.model},
         {"family", query ? "query" : "transfer"},
         {"attack_set_size", cell.entries.size()},
         {"sample_ids", cell.sample_ids},
         {"success",
          {{"successes", hits.size()},
           {"sr", rates.sr},
           {"surrogate_sr", Optional(rates.surrogate_sr)},
           {"transfer_sr", Optional(rates.transfer_sr)},
           {"overall_sr", Optional(rates.overall_sr)}}},
         {"success_ids", hit_ids},
         {"l0", Distribution(l0)},
         {"l2", Distribution(l2)},
         {"queries",
          {{"mean", qs.mean}, {"median", qs.median}, {"max", qs.max}, {"raw", queries}}},
         {"detection", std::move(detection)},
         {"importance_anomaly", std::move(importance)},
         {"validity",
          {{"constraint_violations", violations},
           {"not_misclassified", still_correct},
           {"init_failed", init_failed},
           {"invalid_start", invalid_start},
           {"trace_violations", trace_violations}}}});

    double wall = 0.0;
    long iterations = 0;
    for (size_t i = 0; i < cell.entries.size(); ++i) {
      wall += cell.entries[i].wall_seconds;
      iterations += cell.iterations[i];
    }
    EffortModel e;
    e.queries = qs.mean;
    e.query_time = query_time.at(cell.model);
    e.alpha_q = cfg.effort_alpha_q;
    e.beta = iterations > 0 ? wall / iterations : 0.0;
    e.surrogate_train_time = models.surrogate_seconds;
    timing_cells.push_back(
        {{"attack", cell.attack},
         {"model", cell.model},
         {"wall_seconds_total", wall},
         {"wall_seconds_mean", wall / cell.entries.size()},
         {"beta_seconds", e.beta},
         {"effort_time", query ? TimeQueryAttack(e) : TimeTransferAttack(e)}});
  }
  report["cells"] = std::move(cells);
  report["stats"] = {{"present", false}};
  json qt = json::object();
  for (const auto& [name, t] : query_time) qt[name] = t;
  report["timing"] = {{"query_time_seconds", qt},
                      {"surrogate_train_seconds", models.surrogate_seconds},
                      {"alpha_q", cfg.effort_alpha_q},
                      {"cells", std::move(timing_cells)}};
  return report;
}

namespace {

json ResultJson(const StatResult& r, const std::string& a, const std::string& b,
                int n_a, int n_b) {
  json j = {{"groups", {a, b}},
            {"n", {n_a, n_b}},
            {"test", r.test},
            {"statistic", r.statistic},
            {"p_raw", r.p_raw},
            {"p_adjusted", r.p_adjusted},
            {"effect", r.effect_value},
            {"effect_kind", EffectKindName(r.effect_kind)},
            {"category", EffectCategoryName(r.category)},
            {"significant", r.significant},
            {"exact", r.exact}};
  if (r.doubled_g) j["doubled_g"] = *r.doubled_g;
  return j;
}

// One comparison: either a result or the reason it could not be computed.
struct Comparison {
  std::string a, b;
  int n_a = 0, n_b = 0;
  std::optional<StatResult> result;
  std::string skipped;
};

json FamilyJson(const std::string& model, const std::string& family,
                std::vector<Comparison>& comps) {
  std::vector<StatResult> valid;
  for (const Comparison& c : comps) {
    if (c.result) valid.push_back(*c.result);
  }
  // Holm over the computed comparisons of this family.
  (void)ApplyHolm(valid);
  json list = json::array();
  size_t v = 0;
  for (Comparison& c : comps) {
    if (c.result) {
      c.result = valid[v++];
      list.push_back(ResultJson(*c.result, c.a, c.b, c.n_a, c.n_b));
    } else {
      list.push_back({{"groups", {c.a, c.b}}, {"skipped", c.skipped}});
    }
  }
  return {{"model", model}, {"family", family}, {"comparisons", std::move(list)}};
}

std::vector<double> Doubles(const json& arr) { return arr.get<std::vector<double>>(); }

}  // namespace

absl::StatusOr<json> ComputeStats(const json& report) {
  json families = json::array(), heterogeneity = json::array();
  std::string mcnemar_effect;
  try {
    const json& config = report.at("config");
    std::vector<std::string> attacks;
    std::set<std::string> importance_group;
    for (const json& a : config.at("attacks")) {
      attacks.push_back(a.at("name").get<std::string>());
      if (a.at("selector") == "importance") importance_group.insert(attacks.back());
    }
    std::vector<std::string> kinds = config.at("detector_kinds");
    std::vector<std::string> modes = config.at("detector_modes");
    std::vector<std::string> shap_modes = config.at("shap_modes");
    mcnemar_effect = config.value("mcnemar_effect", "g");
    const bool doubled_basis = mcnemar_effect == "doubled_g";

    for (const json& jm : config.at("models")) {
      const std::string model = jm.get<std::string>();
      std::map<std::string, const json*> cells;
      for (const json& c : report.at("cells")) {
        if (c.at("model") == model) cells[c.at("attack").get<std::string>()] = &c;
      }
      // family name -> extractor producing a comparison for a pair of cells.
      using Compare = std::function<Comparison(const json&, const json&)>;
      std::vector<std::pair<std::string, Compare>> defs;
      auto proportions = [](auto k_of, auto n_of) -> Compare {
        return [=](const json& a, const json& b) {
          Comparison c;
          c.n_a = n_of(a);
          c.n_b = n_of(b);
          if (c.n_a == 0 || c.n_b == 0) {
            c.skipped = "empty group";
          } else {
            c.result = *ProportionsZTest(k_of(a), c.n_a, k_of(b), c.n_b);
          }
          return c;
        };
      };
      auto ranks = [](auto values_of) -> Compare {
        return [=](const json& a, const json& b) {
          Comparison c;
          const std::vector<double> x = values_of(a), y = values_of(b);
          c.n_a = static_cast<int>(x.size());
          c.n_b = static_cast<int>(y.size());
          if (x.empty() || y.empty()) {
            c.skipped = "empty group";
          } else {
            c.result = *MannWhitneyU(x, y);
          }
          return c;
        };
      };
      auto successes = [](const json& c) { return c.at("success").at("successes").get<int>(); };
      defs.emplace_back("success_rate",
                        proportions(successes, [](const json& c) {
                          return c.at("attack_set_size").get<int>();
                        }));
      defs.emplace_back("l0", ranks([](const json& c) { return Doubles(c.at("l0").at("raw")); }));
      defs.emplace_back("l2", ranks([](const json& c) { return Doubles(c.at("l2").at("raw")); }));
      for (const std::string& k : kinds) {
        for (const std::string& m : modes) {
          defs.emplace_back(absl::StrCat("detection/", k, "/", m),
                            proportions([=](const json& c) {
                              return c.at("detection").at(k).at(m).at("flagged").get<int>();
                            }, successes));
        }
      }
      for (const std::string& m : shap_modes) {
        auto out_of_range = [=](const json& c) {
          int n = 0;
          for (const json& v : c.at("importance_anomaly").at(m).at("counts")) n += v.get<int>() > 0;
          return n;
        };
        defs.emplace_back(absl::StrCat("shap_rate/", m), proportions(out_of_range, successes));
        defs.emplace_back(absl::StrCat("shap_count/", m), ranks([=](const json& c) {
                            return Doubles(c.at("importance_anomaly").at(m).at("counts"));
                          }));
      }
      for (const auto& [family, compare] : defs) {
        std::vector<Comparison> comps, group;
        for (size_t i = 0; i < attacks.size(); ++i) {
          for (size_t j = i + 1; j < attacks.size(); ++j) {
            Comparison c = compare(*cells.at(attacks[i]), *cells.at(attacks[j]));
            c.a = attacks[i];
            c.b = attacks[j];
            if (importance_group.count(c.a) && importance_group.count(c.b)) group.push_back(c);
            comps.push_back(std::move(c));
          }
        }
        families.push_back(FamilyJson(model, family, comps));
        if (group.size() > 0) {
          std::vector<StatResult> results;
          for (const Comparison& c : group) {
            if (c.result) results.push_back(*c.result);
          }
          heterogeneity.push_back({{"model", model},
                                   {"family", family},
                                   {"group", "transfer_importance"},
                                   {"pairs", results.size()},
                                   {"heterogeneous", Heterogeneous(results)}});
        }
      }
      // Paired csad vs standard comparisons on the same adversarials.
      const bool both = std::count(shap_modes.begin(), shap_modes.end(), "csad") &&
                        std::count(shap_modes.begin(), shap_modes.end(), "standard");
      if (!both) continue;
      std::vector<Comparison> flags, counts;
      for (const std::string& a : attacks) {
        const json& ia = cells.at(a)->at("importance_anomaly");
        const std::vector<int> cs = ia.at("csad").at("counts");
        const std::vector<int> st = ia.at("standard").at("counts");
        Comparison f, w;
        f.a = w.a = absl::StrCat(a, ":csad");
        f.b = w.b = absl::StrCat(a, ":standard");
        f.n_a = f.n_b = w.n_a = w.n_b = static_cast<int>(cs.size());
        int b = 0, c = 0;
        std::vector<double> diffs;
        for (size_t i = 0; i < cs.size(); ++i) {
          b += cs[i] > 0 && st[i] == 0;
          c += cs[i] == 0 && st[i] > 0;
          diffs.push_back(cs[i] - st[i]);
        }
        if (b + c == 0) {
          f.skipped = "no discordant pairs";
        } else {
          f.result = *McNemarExact(b, c);
          if (doubled_basis) {
            ASSIGN_OR_RETURN(f.result->category,
                             EffectSizeCategory(*f.result->doubled_g, EffectKind::kCohensG));
          }
        }
        absl::StatusOr<StatResult> wr = WilcoxonSignedRank(diffs);
        if (wr.ok()) {
          w.result = *wr;
        } else {
          w.skipped = "all differences zero";
        }
        flags.push_back(std::move(f));
        counts.push_back(std::move(w));
      }
      families.push_back(FamilyJson(model, "shap_flags/csad_vs_standard", flags));
      families.push_back(FamilyJson(model, "shap_count/csad_vs_standard", counts));
    }
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("malformed report: ", e.what()));
  } catch (const std::out_of_range& e) {
    return absl::InvalidArgumentError(absl::StrCat("report is missing a cell: ", e.what()));
  }
  return json{{"present", true},
              {"mcnemar_effect", mcnemar_effect},
              {"families", std::move(families)},
              {"heterogeneity", std::move(heterogeneity)}};
}

namespace {

std::string OutPath(const ExperimentConfig& cfg, const char* file) {
  return (std::filesystem::path(cfg.output_dir) / file).string();
}

absl::Status EnsureOutputDir(const ExperimentConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  if (ec) {
    return absl::UnavailableError(
        absl::StrCat("cannot create ", cfg.output_dir, ": ", ec.message()));
  }
  return absl::OkStatus();
}

absl::Status SaveTrained(const ExperimentConfig& cfg, const TrainedModels& t) {
  RETURN_IF_ERROR(SaveArchive(OutPath(cfg, "models.json"), t.archive));
  return WriteTextFile(OutPath(cfg, "training.json"),
                       json{{"summary", t.summary},
                            {"timing", {{"surrogate_seconds", t.surrogate_seconds}}}}
                               .dump(2) + "\n");
}

absl::StatusOr<TrainedModels> LoadTrained(const ExperimentConfig& cfg) {
  TrainedModels t;
  ASSIGN_OR_RETURN(t.archive, LoadArchive(OutPath(cfg, "models.json")));
  ASSIGN_OR_RETURN(const json j, ReadJsonFile(OutPath(cfg, "training.json")));
  try {
    t.summary = j.at("summary");
    t.surrogate_seconds = j.at("timing").at("surrogate_seconds").get<double>();
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("malformed training.json: ", e.what()));
  }
  return t;
}

absl::Status Finish(const ExperimentConfig& cfg, json& report) {
  if (cfg.stats) {
    absl::StatusOr<json> stats = ComputeStats(report);
    RETURN_IF_ERROR(TagStage(Stage::kStats, stats.status()));
    report["stats"] = *std::move(stats);
  }
  RETURN_IF_ERROR(TagStage(Stage::kEmit, ValidateReport(report)));
  RETURN_IF_ERROR(TagStage(Stage::kEmit, EmitReport(report, cfg.output_dir)));
  return TagStage(Stage::kEmit, EmitPlotData(report, cfg.output_dir));
}

}  // namespace

absl::StatusOr<json> RunExperiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  absl::StatusOr<PreparedData> data = PrepareData(cfg);
  RETURN_IF_ERROR(TagStage(Stage::kData, data.status()));
  RETURN_IF_ERROR(TagStage(Stage::kEmit, EnsureOutputDir(cfg)));
  json summary = {{"completed", "data"}};
  if (opts.stop_after == Stage::kData || opts.stop_after == Stage::kConfig) return summary;

  absl::StatusOr<TrainedModels> trained = TrainModels(cfg, *data);
  RETURN_IF_ERROR(TagStage(Stage::kTrain, trained.status()));
  RETURN_IF_ERROR(TagStage(Stage::kEmit, SaveTrained(cfg, *trained)));
  summary["completed"] = "train";
  if (opts.stop_after == Stage::kTrain) return summary;

  absl::StatusOr<AttackResults> attacks =
      RunAttacks(cfg, *data, trained->archive, opts.jobs);
  RETURN_IF_ERROR(TagStage(Stage::kAttack, attacks.status()));
  RETURN_IF_ERROR(TagStage(Stage::kEmit, WriteTextFile(OutPath(cfg, "ledgers.json"),
                                                       LedgersToJson(*attacks).dump() + "\n")));
  summary["completed"] = "attack";
  if (opts.stop_after == Stage::kAttack) return summary;

  absl::StatusOr<json> report = Evaluate(cfg, *data, *trained, *attacks, opts.jobs);
  RETURN_IF_ERROR(TagStage(Stage::kEvaluate, report.status()));
  if (opts.stop_after == Stage::kEvaluate) {
    RETURN_IF_ERROR(TagStage(Stage::kEmit, EmitReport(*report, cfg.output_dir)));
    return *report;
  }
  RETURN_IF_ERROR(Finish(cfg, *report));
  return *report;
}

absl::Status RunAttackStage(const ExperimentConfig& cfg, int jobs) {
  absl::StatusOr<PreparedData> data = PrepareData(cfg);
  RETURN_IF_ERROR(TagStage(Stage::kData, data.status()));
  absl::StatusOr<TrainedModels> trained = LoadTrained(cfg);
  RETURN_IF_ERROR(TagStage(Stage::kData, trained.status()));
  absl::StatusOr<AttackResults> attacks = RunAttacks(cfg, *data, trained->archive, jobs);
  RETURN_IF_ERROR(TagStage(Stage::kAttack, attacks.status()));
  return TagStage(Stage::kEmit, WriteTextFile(OutPath(cfg, "ledgers.json"),
                                              LedgersToJson(*attacks).dump() + "\n"));
}

absl::StatusOr<json> RunEvaluateStage(const ExperimentConfig& cfg, int jobs) {
  absl::StatusOr<PreparedData> data = PrepareData(cfg);
  RETURN_IF_ERROR(TagStage(Stage::kData, data.status()));
  absl::StatusOr<TrainedModels> trained = LoadTrained(cfg);
  RETURN_IF_ERROR(TagStage(Stage::kData, trained.status()));
  absl::StatusOr<json> lj = ReadJsonFile(OutPath(cfg, "ledgers.json"));
  RETURN_IF_ERROR(TagStage(Stage::kData, lj.status()));
  absl::StatusOr<AttackResults> attacks = LedgersFromJson(*lj);
  RETURN_IF_ERROR(TagStage(Stage::kData, attacks.status()));
  absl::StatusOr<json> report = Evaluate(cfg, *data, *trained, *attacks, jobs);
  RETURN_IF_ERROR(TagStage(Stage::kEvaluate, report.status()));
  RETURN_IF_ERROR(Finish(cfg, *report));
  return *report;
}

absl::StatusOr<json> RunStatsStage(const std::string& dir) {
  const std::string path = (std::filesystem::path(dir) / "report.json").string();
  absl::StatusOr<json> report = ReadJsonFile(path);
  RETURN_IF_ERROR(TagStage(Stage::kData, report.status()));
  absl::StatusOr<json> stats = ComputeStats(*report);
  RETURN_IF_ERROR(TagStage(Stage::kStats, stats.status()));
  (*report)["stats"] = *std::move(stats);
  RETURN_IF_ERROR(TagStage(Stage::kEmit, ValidateReport(*report)));
  RETURN_IF_ERROR(TagStage(Stage::kEmit, EmitReport(*report, dir)));
  return *report;
}

}  // namespace tabadv
