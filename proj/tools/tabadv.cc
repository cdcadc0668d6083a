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

// Command-line front end: validate, run, attack, evaluate, stats.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "tabadv/runner/config.h"
#include "tabadv/runner/pipeline.h"
#include "tabadv/runner/stage.h"

namespace {

using tabadv::ExperimentConfig;
using tabadv::Stage;

struct Flags {
  std::string config;
  std::string out;
  std::optional<uint64_t> seed;
  int jobs = 1;
  std::string stage = "emit";
};

int Fail(const absl::Status& status) {
  std::cerr << "error: " << status.message() << "\n";
  return tabadv::ExitCodeFor(status);
}

absl::StatusOr<ExperimentConfig> Load(const Flags& f) {
  absl::StatusOr<ExperimentConfig> cfg = tabadv::LoadConfig(f.config);
  if (!cfg.ok()) return tabadv::TagStage(Stage::kConfig, cfg.status());
  if (!f.out.empty()) cfg->output_dir = f.out;
  if (f.seed) cfg->seed = *f.seed;
  return cfg;
}

int Validate(const Flags& f) {
  absl::StatusOr<ExperimentConfig> cfg = Load(f);
  if (!cfg.ok()) return Fail(cfg.status());
  absl::StatusOr<tabadv::Schema> schema = tabadv::LoadSchemaFile(cfg->schema_path);
  if (!schema.ok()) return Fail(tabadv::TagStage(Stage::kData, schema.status()));
  const absl::Status st = tabadv::ValidateConfig(*cfg, *schema);
  if (!st.ok()) return Fail(tabadv::TagStage(Stage::kConfig, st));
  std::cout << "config OK: " << cfg->models.size() << " models, " << cfg->attacks.size()
            << " attacks, " << schema->features.size() << " features\n";
  return tabadv::kExitOk;
}

int Run(const Flags& f) {
  absl::StatusOr<ExperimentConfig> cfg = Load(f);
  if (!cfg.ok()) return Fail(cfg.status());
  absl::StatusOr<Stage> stage = tabadv::ParseStage(f.stage);
  if (!stage.ok()) return Fail(tabadv::TagStage(Stage::kConfig, stage.status()));
  tabadv::RunOptions opts;
  opts.jobs = f.jobs;
  opts.stop_after = *stage;
  absl::StatusOr<nlohmann::json> report = tabadv::RunExperiment(*cfg, opts);
  if (!report.ok()) return Fail(report.status());
  std::cout << "completed through stage " << f.stage << "; artifacts in " << cfg->output_dir
            << "\n";
  return tabadv::kExitOk;
}

int Attack(const Flags& f) {
  absl::StatusOr<ExperimentConfig> cfg = Load(f);
  if (!cfg.ok()) return Fail(cfg.status());
  const absl::Status st = tabadv::RunAttackStage(*cfg, f.jobs);
  if (!st.ok()) return Fail(st);
  std::cout << "ledgers written to " << cfg->output_dir << "\n";
  return tabadv::kExitOk;
}

int Evaluate(const Flags& f) {
  absl::StatusOr<ExperimentConfig> cfg = Load(f);
  if (!cfg.ok()) return Fail(cfg.status());
  absl::StatusOr<nlohmann::json> report = tabadv::RunEvaluateStage(*cfg, f.jobs);
  if (!report.ok()) return Fail(report.status());
  std::cout << "report written to " << cfg->output_dir << "\n";
  return tabadv::kExitOk;
}

int Stats(const Flags& f) {
  std::string dir = f.out;
  if (dir.empty()) {
    if (f.config.empty()) {
      return Fail(tabadv::TagStage(Stage::kConfig,
                                   absl::InvalidArgumentError("stats needs --out or --config")));
    }
    absl::StatusOr<ExperimentConfig> cfg = Load(f);
    if (!cfg.ok()) return Fail(cfg.status());
    dir = cfg->output_dir;
  }
  absl::StatusOr<nlohmann::json> report = tabadv::RunStatsStage(dir);
  if (!report.ok()) return Fail(report.status());
  std::cout << "stats block updated in " << dir << "/report.json\n";
  return tabadv::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial robustness evaluation for tabular classifiers"};
  app.require_subcommand(1);
  Flags f;
  auto add_common = [&](CLI::App* sub, bool config_required) {
    CLI::Option* c = sub->add_option("--config", f.config, "Experiment config (JSON)");
    if (config_required) c->required()->check(CLI::ExistingFile);
    sub->add_option("--out", f.out, "Output directory (overrides the config)");
    sub->add_option("--seed", f.seed, "Master seed (overrides the config)");
    sub->add_option("--jobs", f.jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--stage", f.stage,
                    "Last stage to run: data, train, attack, evaluate, stats, emit");
  };
  CLI::App* validate = app.add_subcommand("validate", "Check a config and its schema");
  CLI::App* run = app.add_subcommand("run", "Run the full pipeline");
  CLI::App* attack = app.add_subcommand("attack", "Attack the saved models");
  CLI::App* evaluate = app.add_subcommand("evaluate", "Compute metrics from saved ledgers");
  CLI::App* stats = app.add_subcommand("stats", "Recompute statistical tests of a report");
  for (CLI::App* sub : {validate, run, attack, evaluate}) add_common(sub, true);
  add_common(stats, false);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : tabadv::kExitConfigError;
  }
  if (validate->parsed()) return Validate(f);
  if (run->parsed()) return Run(f);
  if (attack->parsed()) return Attack(f);
  if (evaluate->parsed()) return Evaluate(f);
  return Stats(f);
}
