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

#ifndef MGSMOOTH_PI_SOLVERS_H_
#define MGSMOOTH_PI_SOLVERS_H_

#include <string>
#include <vector>

#include "mgsmooth/bellman.h"
#include "mgsmooth/dense.h"
#include "mgsmooth/game.h"

namespace mgsmooth {

enum class SolverMethod { kNpi, kApi, kSpi };

struct RoundRecord {
  // Policy pair evaluated in this round.
  TabularPolicy pi;
  TabularPolicy mu;
  ValueTable value;
  // PIM game matrix and its equilibrium value for every state.
  std::vector<Matrix> matrices;
  std::vector<double> equilibrium_values;
  // Pair extracted by PIM; evaluated by the next round.
  TabularPolicy next_pi;
  TabularPolicy next_mu;
  int pev_iterations = 0;
  double pev_residual = 0.0;
  bool pev_converged = false;
  // Worst-case (exact max) value of `pi`, filled when diagnostics are on.
  std::vector<double> reference_value;
};

enum class SolveStatus { kConverged, kCycleDetected, kMaxRounds };

struct SolveHistory {
  SolverMethod method = SolverMethod::kApi;
  WlseConfig wlse;  // meaningful for SPI only
  std::vector<RoundRecord> rounds;
  SolveStatus status = SolveStatus::kMaxRounds;
  // Length of the detected policy cycle; 1 means converged.
  int period = 0;
};

struct SolverOptions {
  int max_rounds = 50;
  PevOptions pev;
  // Start each PEV from the previous round's values instead of zeros.
  bool warm_start = true;
  // Also evaluate every round's protagonist policy with the exact worst-case
  // operator and store it in RoundRecord::reference_value.
  bool compare_to_api = false;
};

// Naive policy iteration: joint-value PEV, then per-state matrix-game PIM.
SolveHistory run_npi(const MarkovGame& game, const TabularPolicy& pi0,
                     const TabularPolicy& mu0, const SolverOptions& opts = {});

// Worst-case PEV with an exact max over adversary actions. The adversary
// policy only matters through PIM; round 1 records a uniform placeholder.
SolveHistory run_api(const MarkovGame& game, const TabularPolicy& pi0,
                     const SolverOptions& opts = {});

// Smoothed PEV (WLSE weighted by mu, or uniform weights), then PIM.
SolveHistory run_spi(const MarkovGame& game, const TabularPolicy& pi0,
                     const TabularPolicy& mu0, const WlseConfig& cfg,
                     const SolverOptions& opts = {});

std::string to_string(SolveStatus status);
std::string to_string(SolverMethod method);
std::string history_to_json(const SolveHistory& history);

struct ComparisonRow {
  std::string method;  // "API", "SPI", "SPI-u"
  double rho = 0.0;    // unused for API
  int round = 0;       // 1-based
  int state = 0;
  double value = 0.0;
  // 100 |v - v_API| / |v_API| against the worst-case value of the same
  // protagonist policy.
  double pct_error = 0.0;
  // Smoothed-evaluation error bound for the weights used; 0 for API.
  double bound = 0.0;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  std::vector<SolveHistory> runs;  // API first, then SPI per rho, then SPI-u
};

// Runs API and SPI for every rho in rho_list (adversary weights) and in
// uniform_rho_list (uniform weights), cold-starting every PEV, and tabulates
// per-round values against the exact worst-case value.
ComparisonReport compare_solvers(const MarkovGame& game,
                                 const TabularPolicy& pi0,
                                 const TabularPolicy& mu0,
                                 const std::vector<double>& rho_list,
                                 const std::vector<double>& uniform_rho_list,
                                 int max_rounds = 10);

// CSV columns: method,rho,round,state,value,pct_error,bound.
std::string comparison_csv(const ComparisonReport& report);

}  // namespace mgsmooth

#endif  // MGSMOOTH_PI_SOLVERS_H_
