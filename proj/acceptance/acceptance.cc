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


// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "json.hpp"
#include "tabadv/coherence/constraints.h"
#include "tabadv/common/random.h"
#include "tabadv/csad/cost_model.h"
#include "tabadv/csad/detectors.h"
#include "tabadv/learners/surrogate.h"
#include "tabadv/learners/tree.h"
#include "tabadv/metrics/metrics.h"
#include "tabadv/runner/config.h"
#include "tabadv/runner/pipeline.h"
#include "tabadv/runner/report.h"
#include "tabadv/shap/tree_shap.h"
#include "tabadv/stats/stats.h"

namespace tabadv {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

// Tolerances and budgets.
constexpr double kCostTol = 0.005;
constexpr double kExactTol = 1e-12;
constexpr double kShapTol = 1e-9;
constexpr double kGradRelTol = 1e-4;
constexpr double kFdStep = 1e-5;
constexpr double kRateTol = 0.001;
constexpr int kShapEnsembles = 200;
constexpr int kLocalAccuracyPairs = 10000;
constexpr int kGradTrials = 100;
constexpr int kFuzzInputs = 100000;
constexpr int kMinAttackRuns = 500;
constexpr int kDirectionalSeeds = 5;
constexpr int kDirectionalRequired = 4;
constexpr int kCsadSeeds = 5;
constexpr double kCostSeconds = 1.0;
constexpr double kShapSeconds = 120.0;
constexpr double kGradSeconds = 60.0;
constexpr double kDirectionalSeconds = 600.0;
constexpr double kEndToEndSeconds = 300.0;

double Since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

Outcome Fail(const absl::Status& st) { return {false, std::string(st.message())}; }

// ------------------------------------------------------------ shared runs

struct SeedRun {
  uint64_t seed = 0;
  PreparedData data;
  TrainedModels trained;
  AttackResults attacks;
};

class Context {
 public:
  Context(std::string config_path, std::string work_dir)
      : config_path_(std::move(config_path)), work_dir_(std::move(work_dir)) {}

  absl::StatusOr<ExperimentConfig> Config() const { return LoadConfig(config_path_); }
  const std::string& work_dir() const { return work_dir_; }

  // Attack ledgers of the bundled config under seeds 1..kDirectionalSeeds,
  // computed once.
  absl::StatusOr<const std::vector<SeedRun>*> SeedRuns() {
    if (runs_) return &*runs_;
    const Clock::time_point start = Clock::now();
    std::vector<SeedRun> runs;
    for (int s = 1; s <= kDirectionalSeeds; ++s) {
      absl::StatusOr<ExperimentConfig> cfg = Config();
      if (!cfg.ok()) return cfg.status();
      cfg->seed = s;
      SeedRun r;
      r.seed = s;
      absl::StatusOr<PreparedData> data = PrepareData(*cfg);
      if (!data.ok()) return data.status();
      r.data = *std::move(data);
      absl::StatusOr<TrainedModels> trained = TrainModels(*cfg, r.data);
      if (!trained.ok()) return trained.status();
      r.trained = *std::move(trained);
      absl::StatusOr<AttackResults> attacks = RunAttacks(*cfg, r.data, r.trained.archive, 1);
      if (!attacks.ok()) return attacks.status();
      r.attacks = *std::move(attacks);
      runs.push_back(std::move(r));
    }
    runs_seconds_ = Since(start);
    runs_ = std::move(runs);
    return &*runs_;
  }
  double runs_seconds() const { return runs_seconds_; }

 private:
  std::string config_path_;
  std::string work_dir_;
  std::optional<std::vector<SeedRun>> runs_;
  double runs_seconds_ = 0.0;
};

// ------------------------------------------------------------ 1. cost ratios

Outcome CheckCostRatios(Context&) {
  const Clock::time_point start = Clock::now();
  struct Case {
    std::vector<double> counts;
    double alpha;
    double expected;
    double tol;
  };
  const std::vector<double> balanced(4, 25000.0);
  const std::vector<double> skewed = {97000.0, 1000.0, 1000.0, 1000.0};
  const std::vector<Case> cases = {{balanced, 2.0, 0.25, kExactTol},
                                   {balanced, 1.1, 0.87, kCostTol},
                                   {balanced, 1.0, 1.00, kExactTol},
                                   {skewed, 2.0, 0.94, kCostTol},
                                   {skewed, 1.1, 0.99, kCostTol}};
  std::string detail;
  bool pass = true;
  for (const Case& c : cases) {
    const absl::StatusOr<double> r = CsadCostRatio(c.counts, c.alpha);
    if (!r.ok()) return Fail(r.status());
    pass &= std::abs(*r - c.expected) <= c.tol;
    absl::StrAppendFormat(&detail, "%.4f ", *r);
  }
  const double secs = Since(start);
  pass &= secs < kCostSeconds;
  return {pass, absl::StrCat("ratios ", detail, "(expected 0.25 0.87 1.00 0.94 0.99)")};
}

// ------------------------------------------------------------ 2. rate decomposition

Outcome CheckRateDecomposition(Context& ctx) {
  int ledgers = 0;
  double worst = 0.0;
  auto check = [&](const RunLedger& l) -> absl::Status {
    absl::StatusOr<SuccessRates> r = ComputeSuccessRates(l, AttackFamily::kTransfer);
    if (!r.ok()) return r.status();
    const double product = r->transfer_sr ? *r->surrogate_sr * *r->transfer_sr : 0.0;
    worst = std::max(worst, std::abs(*r->overall_sr - product));
    ++ledgers;
    return absl::OkStatus();
  };
  absl::StatusOr<const std::vector<SeedRun>*> runs = ctx.SeedRuns();
  if (!runs.ok()) return Fail(runs.status());
  for (const SeedRun& run : **runs) {
    for (const CellLedger& c : run.attacks.cells) {
      if (c.kind != AttackKind::kTransfer) continue;
      if (absl::Status st = check(c.entries); !st.ok()) return Fail(st);
    }
  }
  Rng rng(2026);
  for (int t = 0; t < 1000; ++t) {
    const int n = std::uniform_int_distribution<int>(1, 300)(rng);
    const double ps = std::uniform_real_distribution<double>(0, 1)(rng);
    const double pt = std::uniform_real_distribution<double>(0, 1)(rng);
    RunLedger l(n);
    for (LedgerEntry& e : l) {
      e.surrogate_success = std::bernoulli_distribution(ps)(rng);
      e.target_success = e.surrogate_success && std::bernoulli_distribution(pt)(rng);
      e.queries = e.surrogate_success ? 1 : 0;
    }
    if (absl::Status st = check(l); !st.ok()) return Fail(st);
  }
  // Rates rounded to three digits, and the same counts as a 1000-row ledger.
  const double rounded = 0.989 * 0.139;
  RunLedger table(1000);
  for (int i = 0; i < 989; ++i) table[i].surrogate_success = true;
  for (int i = 0; i < 137; ++i) table[i].target_success = true;
  absl::StatusOr<SuccessRates> tr = ComputeSuccessRates(table, AttackFamily::kTransfer);
  if (!tr.ok()) return Fail(tr.status());
  const bool pass = worst <= kExactTol && std::abs(rounded - 0.137) <= kRateTol &&
                    std::abs(*tr->overall_sr - 0.137) <= kRateTol &&
                    std::abs(*tr->transfer_sr - 0.139) <= kRateTol;
  return {pass, absl::StrFormat("%d ledgers, max |overall - product| %.1e; 0.989 x 0.139 = %.4f",
                                ledgers, worst, rounded)};
}

// ------------------------------------------------------------ 3. shap oracle

Tree RandomTree(int d, int max_leaves, Rng& rng) {
  std::uniform_int_distribution<int> feat(0, d - 1);
  std::uniform_real_distribution<double> u(0, 1);
  Tree t;
  t.nodes.emplace_back();
  std::vector<int> leaves = {0};
  const int target = std::uniform_int_distribution<int>(1, max_leaves)(rng);
  while (static_cast<int>(leaves.size()) < target) {
    const size_t pick = std::uniform_int_distribution<size_t>(0, leaves.size() - 1)(rng);
    const int n = leaves[pick];
    leaves.erase(leaves.begin() + pick);
    const int l = static_cast<int>(t.nodes.size());
    t.nodes.resize(l + 2);
    t.nodes[n].feature = feat(rng);
    t.nodes[n].threshold = u(rng);
    t.nodes[n].left = l;
    t.nodes[n].right = l + 1;
    leaves.push_back(l);
    leaves.push_back(l + 1);
  }
  for (const int leaf : leaves) {
    t.nodes[leaf].value = 4 * u(rng) - 2;
    t.nodes[leaf].weight = 1 + std::floor(50 * u(rng));
  }
  for (int i = static_cast<int>(t.nodes.size()) - 1; i >= 0; --i) {
    TreeNode& n = t.nodes[i];
    if (!n.is_leaf()) n.weight = t.nodes[n.left].weight + t.nodes[n.right].weight;
  }
  return t;
}

TreeEnsemble RandomEnsemble(int d, Rng& rng) {
  const int n_trees = std::uniform_int_distribution<int>(1, 4)(rng);
  std::vector<Tree> trees;
  for (int k = 0; k < n_trees; ++k) trees.push_back(RandomTree(d, 64, rng));
  const auto kind = static_cast<EnsembleKind>(std::uniform_int_distribution<int>(0, 2)(rng));
  return TreeEnsemble(kind, d, 0.25, 0.5, std::move(trees));
}

Outcome CheckShap(Context&) {
  const Clock::time_point start = Clock::now();
  Rng rng(11);
  std::uniform_real_distribution<double> u(-0.2, 1.2);
  double worst_bf = 0.0, worst_la = 0.0;
  for (int t = 0; t < kShapEnsembles; ++t) {
    const int d = 1 + t % 12;
    const TreeEnsemble e = RandomEnsemble(d, rng);
    Vec x(d);
    for (double& v : x) v = u(rng);
    absl::StatusOr<ShapExplanation> fast = TreeShap(e, x);
    absl::StatusOr<ShapExplanation> slow = ShapBruteForce(e, x);
    if (!fast.ok()) return Fail(fast.status());
    if (!slow.ok()) return Fail(slow.status());
    worst_bf = std::max(worst_bf, std::abs(fast->base_value - slow->base_value));
    for (int j = 0; j < d; ++j) {
      worst_bf = std::max(worst_bf, std::abs(fast->attributions[j] - slow->attributions[j]));
    }
  }
  const int per_ensemble = 50;
  for (int t = 0; t < kLocalAccuracyPairs / per_ensemble; ++t) {
    const int d = 1 + t % 30;
    const TreeEnsemble e = RandomEnsemble(d, rng);
    for (int s = 0; s < per_ensemble; ++s) {
      Vec x(d);
      for (double& v : x) v = u(rng);
      absl::StatusOr<ShapExplanation> ex = TreeShap(e, x);
      if (!ex.ok()) return Fail(ex.status());
      const double sum = std::accumulate(ex->attributions.begin(), ex->attributions.end(),
                                         ex->base_value);
      worst_la = std::max(worst_la, std::abs(sum - e.Margin(x)));
    }
  }
  const double secs = Since(start);
  return {worst_bf <= kShapTol && worst_la <= kShapTol && secs < kShapSeconds,
          absl::StrFormat("brute-force max |d| %.1e over %d ensembles; local accuracy max "
                          "|d| %.1e over %d pairs; %.1f s",
                          worst_bf, kShapEnsembles, worst_la, kLocalAccuracyPairs, secs)};
}

// ------------------------------------------------------------ 4. gradients

Outcome CheckGradients(Context&) {
  const Clock::time_point start = Clock::now();
  Rng rng(4);
  std::normal_distribution<double> n01(0, 1);
  double worst = 0.0;
  for (int t = 0; t < kGradTrials; ++t) {
    const int d = 2 + t % 9;
    SurrogateArch arch;
    arch.embed_hidden.assign(1 + t % 3, 8 + 8 * (t % 4));
    arch.activation = static_cast<Activation>(t % 3);
    arch.head_width = 4 + t % 7;
    absl::StatusOr<SurrogateModel> m = SurrogateModel::Create(d, arch, 1000 + t);
    if (!m.ok()) return Fail(m.status());
    Vec x(d), xa(d);
    for (int j = 0; j < d; ++j) {
      x[j] = 3 * n01(rng);
      xa[j] = x[j] + n01(rng);
    }
    const int y = t % 2;
    const double alpha = 0.25 * (t % 5);
    absl::StatusOr<Vec> g = m->GradInput(xa, x, y, alpha);
    if (!g.ok()) return Fail(g.status());
    double num = 0.0, den_g = 0.0, den_fd = 0.0;
    for (int j = 0; j < d; ++j) {
      Vec up = xa, dn = xa;
      up[j] += kFdStep;
      dn[j] -= kFdStep;
      const absl::StatusOr<double> fu = m->AdvLoss(up, x, y, alpha);
      const absl::StatusOr<double> fl = m->AdvLoss(dn, x, y, alpha);
      if (!fu.ok()) return Fail(fu.status());
      if (!fl.ok()) return Fail(fl.status());
      const double fd = (*fu - *fl) / (2 * kFdStep);
      num += ((*g)[j] - fd) * ((*g)[j] - fd);
      den_g += (*g)[j] * (*g)[j];
      den_fd += fd * fd;
    }
    const double rel = std::sqrt(num) / std::max({std::sqrt(den_g), std::sqrt(den_fd), 1e-8});
    worst = std::max(worst, rel);
  }
  const double secs = Since(start);
  return {worst < kGradRelTol && secs < kGradSeconds,
          absl::StrFormat("max relative error %.2e over %d surrogates; %.1f s", worst,
                          kGradTrials, secs)};
}

// ------------------------------------------------------------ 5. thresholds

Outcome CheckThresholds(Context& ctx) {
  absl::StatusOr<ExperimentConfig> cfg = ctx.Config();
  if (!cfg.ok()) return Fail(cfg.status());
  absl::StatusOr<PreparedData> data = PrepareData(*cfg);
  if (!data.ok()) return Fail(data.status());
  double worst_threshold = 0.0;
  double worst_gap_units = 0.0;  // |IF fpr - AE fpr| in units of 1 / n_validation
  int detectors = 0;
  for (const DetectionMode mode : {DetectionMode::kCsad, DetectionMode::kStandard}) {
    BankConfig bc = cfg->bank;
    bc.seed = DeriveSeed(cfg->seed, "detectors", static_cast<int>(mode));
    bc.forest.seed = DeriveSeed(cfg->seed, "detectors/forest", static_cast<int>(mode));
    absl::StatusOr<DetectorBank> ae =
        FitBank(data->target_train, DetectorKind::kAutoencoder, mode, bc);
    if (!ae.ok()) return Fail(ae.status());
    bc.if_target_fpr = ae->ValidationFprs();
    absl::StatusOr<DetectorBank> forest =
        FitBank(data->target_train, DetectorKind::kIsolationForest, mode, bc);
    if (!forest.ok()) return Fail(forest.status());
    for (size_t k = 0; k < ae->detectors().size(); ++k) {
      const Detector& a = ae->detectors()[k];
      const Detector& f = forest->detectors()[k];
      const Vec& v = a.validation_scores;
      const double n = static_cast<double>(v.size());
      const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
      double ss = 0.0;
      for (const double e : v) ss += (e - mean) * (e - mean);
      const double expected = mean + 2.0 * std::sqrt(ss / n);
      worst_threshold = std::max(worst_threshold, std::abs(a.threshold - expected));
      auto fpr = [](const Detector& d) {
        const auto hits = std::count_if(d.validation_scores.begin(), d.validation_scores.end(),
                                        [&](double s) { return s > d.threshold; });
        return static_cast<double>(hits) / d.validation_scores.size();
      };
      const double gap = std::abs(fpr(f) - fpr(a)) * f.validation_scores.size();
      worst_gap_units = std::max(worst_gap_units, gap);
      worst_threshold = std::max(worst_threshold, std::abs(a.validation_fpr - fpr(a)));
      ++detectors;
    }
  }
  return {worst_threshold <= kExactTol && worst_gap_units <= 1.0 + kExactTol,
          absl::StrFormat("%d AE/IF detector pairs; max threshold error %.1e; max IF-AE FPR "
                          "gap %.2f sample units",
                          detectors, worst_threshold, worst_gap_units)};
}

// ------------------------------------------------------------ 6. constraint fuzz

Outcome CheckConstraintFuzz(Context& ctx) {
  absl::StatusOr<ExperimentConfig> cfg = ctx.Config();
  if (!cfg.ok()) return Fail(cfg.status());
  absl::StatusOr<PreparedData> data = PrepareData(*cfg);
  if (!data.ok()) return Fail(data.status());
  std::vector<int> dependents;
  for (int j = 0; j < static_cast<int>(data->schema.features.size()); ++j) {
    if (data->schema.features[j].dependent) dependents.push_back(j);
  }
  absl::StatusOr<DependencyRegistry> reg =
      FitDependencyModels(data->attacker_train, dependents, cfg->dependency_model);
  if (!reg.ok()) return Fail(reg.status());
  const ConstraintSet c = ConstraintSet::FromSchema(data->schema);
  Rng rng(6);
  std::normal_distribution<double> n01(0, 1);
  std::uniform_int_distribution<size_t> row(0, data->test.size() - 1);
  std::uniform_int_distribution<int> mode(0, 3);
  int violations = 0, not_idempotent = 0, immutable_changed = 0;
  const int d = static_cast<int>(data->schema.features.size());
  for (int i = 0; i < kFuzzInputs; ++i) {
    const Vec& x = data->test.rows[row(rng)];
    Vec xa(d);
    for (int j = 0; j < d; ++j) {
      const FeatureSpec& f = data->schema.features[j];
      const double span = f.max - f.min;
      switch (mode(rng)) {
        case 0: xa[j] = x[j] + 0.1 * span * n01(rng); break;
        case 1: xa[j] = x[j] + 10 * span * n01(rng); break;
        case 2: xa[j] = (n01(rng) < 0 ? f.min : f.max) + 1e-9 * n01(rng); break;
        default: xa[j] = 1e6 * n01(rng); break;
      }
    }
    const Vec once = TabularModify(x, xa, c, *reg);
    const Vec twice = TabularModify(x, once, c, *reg);
    not_idempotent += std::memcmp(once.data(), twice.data(), d * sizeof(double)) != 0;
    violations += !CheckConstraints(x, once, c).ok();
    for (const int j : c.immutable) {
      immutable_changed += std::memcmp(&once[j], &x[j], sizeof(double)) != 0;
    }
  }
  return {violations == 0 && not_idempotent == 0 && immutable_changed == 0,
          absl::StrFormat("%d inputs: %d violations, %d non-idempotent, %d immutable changes",
                          kFuzzInputs, violations, not_idempotent, immutable_changed)};
}

// ------------------------------------------------------------ 7. attack validity

Outcome CheckAttackValidity(Context& ctx) {
  absl::StatusOr<const std::vector<SeedRun>*> runs = ctx.SeedRuns();
  if (!runs.ok()) return Fail(runs.status());
  int total = 0, successes = 0, misclassify_fail = 0, violations = 0, not_projected = 0;
  int boundary_runs = 0, boundary_bad = 0;
  std::set<std::string> attacks;
  for (const SeedRun& run : **runs) {
    const ConstraintSet c = ConstraintSet::FromSchema(run.data.schema);
    const DependencyRegistry& reg = run.trained.archive.registry;
    for (const CellLedger& cell : run.attacks.cells) {
      attacks.insert(cell.attack);
      const TreeEnsemble& target = run.trained.archive.targets.at(cell.model);
      for (size_t i = 0; i < cell.entries.size(); ++i) {
        const LedgerEntry& e = cell.entries[i];
        ++total;
        if (cell.kind == AttackKind::kBoundary) {
          ++boundary_runs;
          const std::vector<double>& t = cell.l2_traces[i];
          for (size_t k = 1; k < t.size(); ++k) {
            if (!(t[k] < t[k - 1])) {
              ++boundary_bad;
              break;
            }
          }
        }
        if (!e.target_success) continue;
        ++successes;
        misclassify_fail += target.Label(e.x_adv) == cell.labels[i];
        violations += !CheckConstraints(e.x, e.x_adv, c).ok();
        not_projected += TabularModify(e.x, e.x_adv, c, reg) != e.x_adv;
      }
    }
  }
  const bool pass = total >= kMinAttackRuns && attacks.size() == 7 && misclassify_fail == 0 &&
                    violations == 0 && not_projected == 0 && boundary_bad == 0;
  return {pass, absl::StrFormat("%d runs of %d attacks, %d successes: %d still correct, %d "
                                "constraint violations, %d off the projection; boundary "
                                "traces non-decreasing %d of %d",
                                total, attacks.size(), successes, misclassify_fail, violations,
                                not_projected, boundary_bad, boundary_runs)};
}

// ------------------------------------------------------------ 8. directional

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Outcome CheckDirectional(Context& ctx) {
  absl::StatusOr<const std::vector<SeedRun>*> runs = ctx.SeedRuns();
  if (!runs.ok()) return Fail(runs.status());
  int passing = 0;
  std::string detail;
  for (const SeedRun& run : **runs) {
    // Per model: worst query cell against best transfer cell.
    std::map<std::string, double> query_sr, transfer_sr, query_l0, transfer_l0;
    for (const CellLedger& cell : run.attacks.cells) {
      const bool query = cell.kind != AttackKind::kTransfer;
      absl::StatusOr<SuccessRates> r = ComputeSuccessRates(
          cell.entries, query ? AttackFamily::kQuery : AttackFamily::kTransfer);
      if (!r.ok()) return Fail(r.status());
      std::vector<double> l0;
      for (const LedgerEntry& e : cell.entries) {
        if (!e.target_success) continue;
        absl::StatusOr<int> z = L0(e.x, e.x_adv, run.data.schema.features);
        if (!z.ok()) return Fail(z.status());
        l0.push_back(*z);
      }
      const std::string& m = cell.model;
      if (query) {
        query_sr.try_emplace(m, 1.0);
        query_sr[m] = std::min(query_sr[m], r->sr);
        query_l0.try_emplace(m, 1e300);
        if (!l0.empty()) query_l0[m] = std::min(query_l0[m], Median(l0));
      } else {
        transfer_sr[m] = std::max(transfer_sr[m], *r->overall_sr);
        if (!l0.empty()) transfer_l0[m] = std::max(transfer_l0[m], Median(l0));
      }
    }
    bool ok = true;
    for (const auto& [m, q] : query_sr) {
      ok &= q >= transfer_sr[m] && transfer_l0[m] <= query_l0[m];
      absl::StrAppendFormat(&detail, "%s%d/%s sr %.2f>=%.2f l0 %.1f<=%.1f",
                            detail.empty() ? "" : "; ", run.seed, m, q, transfer_sr[m],
                            transfer_l0[m], query_l0[m]);
    }
    passing += ok;
  }
  const double secs = ctx.runs_seconds();
  return {passing >= kDirectionalRequired && secs < kDirectionalSeconds,
          absl::StrFormat("%d of %d seeds hold (%.0f s): %s", passing, kDirectionalSeeds, secs,
                          detail)};
}

// ------------------------------------------------------------ 9. csad superiority

Outcome CheckCsadSuperiority(Context&) {
  constexpr int kDims = 4, kPerClass = 400, kImpostors = 200;
  std::vector<StatResult> family;
  std::string detail;
  bool strict = true;
  for (int s = 0; s < kCsadSeeds; ++s) {
    Rng rng(900 + s);
    std::uniform_real_distribution<double> u(0, 1);
    auto draw = [&](int cls) {
      Vec x(kDims);
      for (double& v : x) v = u(rng) + 3.0 * cls;
      return x;
    };
    Dataset benign;
    for (int j = 0; j < kDims; ++j) {
      FeatureSpec f;
      f.name = absl::StrCat("f", j);
      f.min = 0;
      f.max = 4;
      benign.schema.features.push_back(f);
    }
    benign.schema.label_name = "label";
    benign.schema.n_classes = 2;
    for (int cls = 0; cls < 2; ++cls) {
      for (int i = 0; i < kPerClass; ++i) {
        benign.rows.push_back(draw(cls));
        benign.labels.push_back(cls);
      }
    }
    // Class-0 points predicted as class 1.
    std::vector<Vec> impostors;
    for (int i = 0; i < kImpostors; ++i) impostors.push_back(draw(0));

    std::map<DetectionMode, std::vector<double>> ae_fpr;
    for (const DetectorKind kind : {DetectorKind::kAutoencoder, DetectorKind::kIsolationForest}) {
      std::map<DetectionMode, std::vector<bool>> flags;
      for (const DetectionMode mode : {DetectionMode::kCsad, DetectionMode::kStandard}) {
        BankConfig bc;
        bc.seed = DeriveSeed(s, "detectors", static_cast<int>(mode));
        bc.forest.seed = DeriveSeed(s, "detectors/forest", static_cast<int>(mode));
        if (kind == DetectorKind::kIsolationForest) bc.if_target_fpr = ae_fpr[mode];
        absl::StatusOr<DetectorBank> bank = FitBank(benign, kind, mode, bc);
        if (!bank.ok()) return Fail(bank.status());
        if (kind == DetectorKind::kAutoencoder) ae_fpr[mode] = bank->ValidationFprs();
        for (const Vec& x : impostors) {
          absl::StatusOr<bool> f = bank->IsAnomalous(x, 1);
          if (!f.ok()) return Fail(f.status());
          flags[mode].push_back(*f);
        }
      }
      int b = 0, c = 0, csad = 0, standard = 0;
      for (int i = 0; i < kImpostors; ++i) {
        const bool fc = flags[DetectionMode::kCsad][i], fs = flags[DetectionMode::kStandard][i];
        csad += fc;
        standard += fs;
        b += fc && !fs;
        c += fs && !fc;
      }
      strict &= csad > standard;
      absl::StatusOr<StatResult> r = McNemarExact(b, c);
      if (!r.ok()) return Fail(r.status());
      family.push_back(*r);
      absl::StrAppendFormat(&detail, "%s%d/%s %.2f vs %.2f", detail.empty() ? "" : "; ", s,
                            DetectorKindName(kind), static_cast<double>(csad) / kImpostors,
                            static_cast<double>(standard) / kImpostors);
    }
  }
  if (absl::Status st = ApplyHolm(family); !st.ok()) return Fail(st);
  double worst_p = 0.0;
  for (const StatResult& r : family) worst_p = std::max(worst_p, r.p_adjusted);
  return {strict && worst_p < kSignificanceLevel,
          absl::StrFormat("max Holm p %.1e over %d tests; csad vs standard rates: %s", worst_p,
                          family.size(), detail)};
}

// ------------------------------------------------------------ 10. stats oracles

double UStat(const std::vector<double>& x, const std::vector<double>& y) {
  double u = 0.0;
  for (const double a : x) {
    for (const double b : y) u += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
  }
  return u;
}

double EnumerateMannWhitney(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> pooled = x;
  pooled.insert(pooled.end(), y.begin(), y.end());
  const int n = static_cast<int>(pooled.size()), n1 = static_cast<int>(x.size());
  const double center = 0.5 * x.size() * y.size();
  const double observed = std::abs(UStat(x, y) - center);
  double hit = 0, all = 0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) != n1) continue;
    std::vector<double> a, b;
    for (int i = 0; i < n; ++i) ((mask >> i) & 1 ? a : b).push_back(pooled[i]);
    all += 1;
    hit += std::abs(UStat(a, b) - center) >= observed - 1e-9;
  }
  return hit / all;
}

double EnumerateWilcoxon(const std::vector<double>& d) {
  const int n = static_cast<int>(d.size());
  std::vector<double> rank(n);
  for (int i = 0; i < n; ++i) {
    double less = 0, eq = 0;
    for (int j = 0; j < n; ++j) {
      less += std::abs(d[j]) < std::abs(d[i]);
      eq += std::abs(d[j]) == std::abs(d[i]);
    }
    rank[i] = less + (eq + 1) / 2;
  }
  double total = 0, observed = 0;
  for (int i = 0; i < n; ++i) {
    total += rank[i];
    if (d[i] > 0) observed += rank[i];
  }
  double hit = 0;
  for (unsigned s = 0; s < (1u << n); ++s) {
    double w = 0;
    for (int i = 0; i < n; ++i) w += (s >> i) & 1 ? rank[i] : 0;
    hit += std::abs(w - total / 2) >= std::abs(observed - total / 2) - 1e-9;
  }
  return hit / (1u << n);
}

double EnumerateMcNemar(int b, int c) {
  const int n = b + c, k = std::min(b, c);
  double tail = 0;
  for (unsigned s = 0; s < (1u << n); ++s) tail += std::popcount(s) <= k;
  return std::min(1.0, 2 * tail / (1u << n));
}

Outcome CheckStatsOracles(Context&) {
  Rng rng(10);
  double worst = 0.0;
  int instances = 0;
  for (int n1 = 1; n1 <= 8; ++n1) {
    for (int n2 = 1; n2 <= 8; ++n2) {
      for (int levels = 2; levels <= 9; levels += 7) {
        for (int rep = 0; rep < 5; ++rep) {
          std::uniform_int_distribution<int> v(0, levels - 1);
          std::vector<double> x(n1), y(n2);
          for (double& e : x) e = v(rng);
          for (double& e : y) e = v(rng);
          absl::StatusOr<StatResult> r = MannWhitneyU(x, y);
          if (!r.ok()) return Fail(r.status());
          worst = std::max(worst, std::abs(r->p_raw - EnumerateMannWhitney(x, y)));
          ++instances;
        }
      }
    }
  }
  for (int n = 1; n <= 8; ++n) {
    for (int rep = 0; rep < 40; ++rep) {
      std::uniform_int_distribution<int> v(-3, 3);
      std::vector<double> d;
      while (static_cast<int>(d.size()) < n) {
        if (const int e = v(rng); e != 0) d.push_back(e);
      }
      absl::StatusOr<StatResult> r = WilcoxonSignedRank(d);
      if (!r.ok()) return Fail(r.status());
      worst = std::max(worst, std::abs(r->p_raw - EnumerateWilcoxon(d)));
      ++instances;
    }
  }
  for (int b = 0; b <= 8; ++b) {
    for (int c = 0; b + c <= 8; ++c) {
      if (b + c == 0) continue;
      absl::StatusOr<StatResult> r = McNemarExact(b, c);
      if (!r.ok()) return Fail(r.status());
      worst = std::max(worst, std::abs(r->p_raw - EnumerateMcNemar(b, c)));
      ++instances;
    }
  }
  const std::vector<double> raw = {0.01, 0.04, 0.03};
  absl::StatusOr<std::vector<double>> holm = HolmAdjust(raw);
  if (!holm.ok()) return Fail(holm.status());
  const std::vector<double> expected = {0.03, 0.06, 0.06};
  double holm_err = 0.0;
  for (int i = 0; i < 3; ++i) holm_err = std::max(holm_err, std::abs((*holm)[i] - expected[i]));
  absl::StatusOr<StatResult> h0 = ProportionsZTest(7, 20, 7, 20);
  absl::StatusOr<StatResult> hpi = ProportionsZTest(20, 20, 0, 20);
  if (!h0.ok()) return Fail(h0.status());
  if (!hpi.ok()) return Fail(hpi.status());
  const bool endpoints = h0->effect_value == 0.0 && hpi->effect_value == std::numbers::pi;
  return {worst <= kExactTol && holm_err <= kExactTol && endpoints,
          absl::StrFormat("%d exact instances, max |p - enumeration| %.1e; holm error %.1e; "
                          "h endpoints %g, %.17g",
                          instances, worst, holm_err, h0->effect_value, hpi->effect_value)};
}

// ------------------------------------------------------------ 11. end to end

std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Names of metric families that are missing or empty in a report.
std::vector<std::string> EmptyFamilies(const json& report) {
  std::vector<std::string> missing;
  auto need = [&](bool ok, const std::string& what) {
    if (!ok) missing.push_back(what);
  };
  for (const json& c : report.at("cells")) {
    const std::string id = c.at("model").get<std::string>() + "/" + c.at("attack").get<std::string>();
    need(c.at("success").at("successes").get<int>() > 0, id + " successes");
    need(!c.at("l0").is_null() && !c.at("l0").at("median").is_null(), id + " l0");
    need(!c.at("l2").is_null() && !c.at("l2").at("median").is_null(), id + " l2");
    need(c.at("queries").at("raw").size() == c.at("attack_set_size").get<size_t>(),
         id + " queries");
    for (const auto& [kind, modes] : c.at("detection").items()) {
      for (const auto& [mode, block] : modes.items()) {
        need(!block.at("rate").is_null(), id + " detection/" + kind + "/" + mode);
      }
    }
    need(c.at("detection").size() == 2, id + " detector kinds");
    for (const auto& [mode, block] : c.at("importance_anomaly").items()) {
      need(!block.at("rate").is_null(), id + " shap/" + mode);
    }
    need(c.at("importance_anomaly").size() == 2, id + " shap modes");
  }
  need(report.at("timing").at("cells").size() == report.at("cells").size(), "effort timing");
  std::map<std::string, int> computed;
  for (const json& f : report.at("stats").at("families")) {
    for (const json& c : f.at("comparisons")) {
      computed[f.at("family").get<std::string>()] += !c.contains("skipped");
    }
  }
  for (const char* fam : {"success_rate", "l0", "l2", "detection/if/csad",
                          "detection/if/standard", "detection/ae/csad", "detection/ae/standard",
                          "shap_rate/csad", "shap_rate/standard", "shap_count/csad",
                          "shap_count/standard", "shap_flags/csad_vs_standard",
                          "shap_count/csad_vs_standard"}) {
    need(computed[fam] > 0, std::string("stats ") + fam);
  }
  need(!report.at("stats").at("heterogeneity").empty(), "stats heterogeneity");
  return missing;
}

Outcome CheckEndToEnd(Context& ctx) {
  std::vector<json> reports;
  std::vector<std::string> dirs;
  double slowest = 0.0;
  for (const char* name : {"e2e_a", "e2e_b"}) {
    absl::StatusOr<ExperimentConfig> cfg = ctx.Config();
    if (!cfg.ok()) return Fail(cfg.status());
    cfg->output_dir = (std::filesystem::path(ctx.work_dir()) / name).string();
    std::filesystem::remove_all(cfg->output_dir);
    const Clock::time_point start = Clock::now();
    absl::StatusOr<json> r = RunExperiment(*cfg, RunOptions{});
    slowest = std::max(slowest, Since(start));
    if (!r.ok()) return Fail(r.status());
    absl::StatusOr<json> disk = ReadJsonFile(cfg->output_dir + "/report.json");
    if (!disk.ok()) return Fail(disk.status());
    if (absl::Status st = ValidateReport(*disk); !st.ok()) return Fail(st);
    reports.push_back(*std::move(disk));
    dirs.push_back(cfg->output_dir);
  }
  const std::vector<std::string> empty = EmptyFamilies(reports[0]);
  bool stable = WithoutTiming(reports[0]).dump(2) == WithoutTiming(reports[1]).dump(2);
  for (const char* f : {"models.json", "perturbation.csv", "detection.csv", "shap_anomaly.csv",
                        "detection_rates.csv"}) {
    stable &= Slurp(dirs[0] + "/" + f) == Slurp(dirs[1] + "/" + f);
  }
  std::vector<json> training;
  for (const std::string& d : dirs) {
    absl::StatusOr<json> t = ReadJsonFile(d + "/training.json");
    if (!t.ok()) return Fail(t.status());
    training.push_back(WithoutTiming(*t));
  }
  stable &= training[0] == training[1];
  // Ledgers carry per-run wall time; compare everything else.
  std::vector<json> ledgers;
  for (const std::string& d : dirs) {
    absl::StatusOr<json> l = ReadJsonFile(d + "/ledgers.json");
    if (!l.ok()) return Fail(l.status());
    for (json& cell : (*l)["cells"]) {
      for (json& row : cell["rows"]) row.erase("wall_seconds");
    }
    ledgers.push_back(*std::move(l));
  }
  stable &= ledgers[0] == ledgers[1];
  std::string detail = absl::StrFormat("slowest run %.1f s; byte-stable %s; empty families %d",
                                       slowest, stable ? "yes" : "no", empty.size());
  if (!empty.empty()) absl::StrAppend(&detail, " (first: ", empty.front(), ")");
  return {slowest < kEndToEndSeconds && stable && empty.empty(), detail};
}

// ------------------------------------------------------------ driver

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome(Context&)> run;
};

}  // namespace
}  // namespace tabadv

int main(int argc, char** argv) {
  using namespace tabadv;
  CLI::App app{"Acceptance checks"};
  std::string config = TABADV_BUNDLED_CONFIG;
  std::string work_dir = "acceptance_out";
  std::vector<int> only;
  app.add_option("--config", config, "Bundled experiment config")->check(CLI::ExistingFile);
  app.add_option("--work-dir", work_dir, "Scratch directory for end-to-end runs");
  app.add_option("--only", only, "Run only these criteria (1-11)");
  CLI11_PARSE(app, argc, argv);
  std::filesystem::create_directories(work_dir);

  const std::vector<Criterion> criteria = {
      {1, "csad cost ratios", CheckCostRatios},
      {2, "success-rate decomposition", CheckRateDecomposition},
      {3, "tree shap oracle", CheckShap},
      {4, "surrogate input gradient", CheckGradients},
      {5, "detector threshold calibration", CheckThresholds},
      {6, "constraint projection fuzz", CheckConstraintFuzz},
      {7, "attack validity", CheckAttackValidity},
      {8, "query vs transfer direction", CheckDirectional},
      {9, "csad superiority", CheckCsadSuperiority},
      {10, "statistics oracles", CheckStatsOracles},
      {11, "end-to-end run", CheckEndToEnd},
  };
  Context ctx(config, work_dir);
  int failed = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    const Outcome o = c.run(ctx);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << c.id << ". " << c.name << ": "
              << o.detail << absl::StrFormat(" [%.1f s]", secs) << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
