// Copyright 2026 The mgsmooth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Command-line runner: tabular experiments, training, evaluation, disturbance
// sweeps and the gradient check suite. Exit codes: 0 success, 1 usage or
// config error, 2 numerical failure.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mgsmooth/error.h"
#include "mgsmooth/experiments.h"
#include "mgsmooth/format.h"
#include "mgsmooth/nn.h"
#include "mgsmooth/saac.h"

namespace {

using namespace mgsmooth;

struct Common {
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string config;
  std::vector<std::string> sets;
  std::string preset = "desk";
};

std::string out_dir(const Common& c) {
  if (!c.out.empty()) return c.out;
  if (const char* env = std::getenv("MGSMOOTH_OUT"); env != nullptr && *env != '\0') return env;
  return "out";
}

saac::TrainConfig build_config(const Common& c) {
  saac::TrainConfig cfg;
  if (c.preset == "desk") {
    cfg = saac::desk_preset();
  } else if (c.preset != "full") {
    throw Error(ErrorCode::kConfigError, "unknown preset '" + c.preset + "'");
  }
  if (!c.config.empty()) cfg = saac::load_config(c.config, cfg);
  for (const std::string& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::kConfigError, "--set needs key=value: " + kv);
    saac::apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (c.seed) cfg.seed = *c.seed;
  saac::validate(cfg);
  return cfg;
}

void save(const Common& c, const Artifacts& files) {
  const std::string dir = out_dir(c);
  write_artifacts(dir, files);
  for (const Artifact& a : files) std::printf("wrote %s/%s\n", dir.c_str(), a.name.c_str());
}

nn::MlpParams load_protagonist(const std::string& path) {
  return saac::Networks::from_named(nn::load_checkpoint(path)).protagonist;
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfigError:
    case ErrorCode::kIoError:
    case ErrorCode::kInvalidArgument:
      return 1;
    default:
      return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Smoothed policy iteration and adversarial actor-critic experiments"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--out", common.out, "Output directory (default $MGSMOOTH_OUT, then ./out)");
  app.add_option("--seed", common.seed, "Training seed");
  app.add_option("--config", common.config, "key=value config file")->check(CLI::ExistingFile);
  app.add_option("--set", common.sets, "Override one config key, key=value");
  app.add_option("--preset", common.preset, "Base settings: desk or full")
      ->check(CLI::IsMember({"desk", "full"}));
  app.fallthrough();

  auto* tabular = app.add_subcommand("tabular", "Two-state game tables, traces and bounds");

  auto* train = app.add_subcommand("train", "Train one or more algorithms");
  std::vector<std::string> algos;
  train->add_option("--algo", algos, "saac, saac-u, rarl or adp; comma separated")
      ->delimiter(',');

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  std::string checkpoint;
  double disturbance = 0.0;
  eval->add_option("--checkpoint", checkpoint, "Checkpoint JSON")->required();
  eval->add_option("--disturbance", disturbance, "Fixed lateral disturbance");

  auto* sweep = app.add_subcommand("sweep", "Evaluate a checkpoint over a disturbance grid");
  std::string grid = "-0.3:0.06:0.3";
  sweep->add_option("--checkpoint", checkpoint, "Checkpoint JSON")->required();
  sweep->add_option("--grid", grid, "lo:step:hi");

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (tabular->parsed()) {
      save(common, tabular_artifacts());
    } else if (train->parsed()) {
      saac::TrainConfig cfg = build_config(common);
      std::vector<saac::Algorithm> list;
      for (const std::string& a : algos) list.push_back(saac::algorithm_from_string(a));
      if (list.empty()) list.push_back(cfg.algorithm);
      for (saac::Algorithm a : list) {
        cfg.algorithm = a;
        saac::TrainResult r;
        Artifacts files = train_artifacts(cfg, &r);
        for (const std::string& w : r.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
        const saac::MetricsRow& last = r.history.back();
        std::printf("%s: final TAR %s, best TAR %s\n", saac::to_string(a).c_str(),
                    format_sig(last.eval.tar).c_str(), format_sig(r.best_tar).c_str());
        save(common, files);
      }
    } else if (eval->parsed()) {
      const saac::TrainConfig cfg = build_config(common);
      const saac::EvalResult r =
          saac::evaluate(load_protagonist(checkpoint), saac::env_for(cfg), cfg.eval_episodes,
                         cfg.eval_steps, cfg.eval_seed, disturbance);
      std::printf("TAR %s\n", format_sig(r.tar).c_str());
      save(common, {{"eval.json", eval_json(r, cfg.eval_episodes, cfg.eval_steps,
                                            cfg.eval_seed, disturbance)}});
    } else if (sweep->parsed()) {
      const saac::TrainConfig cfg = build_config(common);
      const auto rows =
          saac::robustness_sweep(load_protagonist(checkpoint), saac::env_for(cfg),
                                 parse_grid(grid), cfg.eval_episodes, cfg.eval_steps,
                                 cfg.eval_seed);
      save(common, {{"sweep.csv", saac::sweep_csv(rows)}});
    } else if (gradcheck->parsed()) {
      const auto entries = saac::gradient_suite(common.seed.value_or(0));
      bool ok = true;
      for (const saac::GradCheckEntry& e : entries) {
        std::printf("%-44s %-10s %s\n", e.name.c_str(), format_sig(e.rel_error, 3).c_str(),
                    e.passed() ? "ok" : "FAIL");
        ok = ok && e.passed();
      }
      save(common, {{"gradcheck.csv", gradcheck_csv(entries)}});
      if (!ok) return 2;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(e.code());
  }
  return 0;
}
