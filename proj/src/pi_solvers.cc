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

#include "mgsmooth/pi_solvers.h"

#include <cmath>
#include <map>
#include <sstream>

#include "json.hpp"
#include "mgsmooth/error.h"
#include "mgsmooth/format.h"
#include "mgsmooth/matrix_game.h"

namespace mgsmooth {
namespace {

using PolicyKey = std::vector<long long>;

// Policies are compared on a 1e-9 grid. API never evaluates mu, so only
// the protagonist policy identifies its rounds.
PolicyKey quantize(SolverMethod method, const TabularPolicy& pi,
                   const TabularPolicy& mu) {
  PolicyKey key;
  key.reserve(pi.flat().size() + mu.flat().size());
  for (double p : pi.flat()) key.push_back(std::llround(p * 1e9));
  if (method == SolverMethod::kApi) return key;
  for (double p : mu.flat()) key.push_back(std::llround(p * 1e9));
  return key;
}

void check_shapes(const MarkovGame& game, const TabularPolicy& pi,
                  const TabularPolicy& mu) {
  if (pi.n_states() != game.n_states() ||
      pi.n_actions() != game.n_protagonist_actions() ||
      mu.n_states() != game.n_states() ||
      mu.n_actions() != game.n_adversary_actions()) {
    throw Error(ErrorCode::kPolicyShapeMismatch, "policy does not fit game");
  }
}

SolveHistory run(SolverMethod method, const MarkovGame& game,
                 const TabularPolicy& pi0, const TabularPolicy& mu0,
                 const WlseConfig& cfg, const SolverOptions& opts) {
  check_shapes(game, pi0, mu0);
  SolveHistory history;
  history.method = method;
  history.wlse = cfg;
  const int ns = game.n_states();
  TabularPolicy pi = pi0;
  TabularPolicy mu = mu0;
  ValueTable v = ValueTable::zeros(ns);
  std::map<PolicyKey, int> seen;

  for (int k = 0; k < opts.max_rounds; ++k) {
    const PolicyKey current = quantize(method, pi, mu);
    seen.emplace(current, k);

    RoundRecord rec;
    rec.pi = pi;
    rec.mu = mu;
    BellmanOperator op = method == SolverMethod::kNpi
                             ? BellmanOperator::joint(game, pi, mu)
                         : method == SolverMethod::kApi
                             ? BellmanOperator::worst_case(game, pi)
                             : BellmanOperator::smoothed(game, pi, mu, cfg);
    PevResult pev = pev_fixed_point(
        op, opts.warm_start ? v : ValueTable::zeros(ns), opts.pev);
    rec.value = pev.value;
    rec.pev_iterations = pev.trace.iterations;
    rec.pev_residual = pev.value.residual;
    rec.pev_converged = pev.trace.converged;
    if (opts.compare_to_api) {
      rec.reference_value =
          method == SolverMethod::kApi
              ? pev.value.values
              : pev_fixed_point(BellmanOperator::worst_case(game, pi),
                                ValueTable::zeros(ns), opts.pev)
                    .value.values;
    }
    v = pev.value;

    std::vector<double> next_pi;
    std::vector<double> next_mu;
    for (int s = 0; s < ns; ++s) {
      Matrix q = joint_q_matrix(game, v, s);
      MatrixGameSolution ne = solve_matrix_game(q);
      next_pi.insert(next_pi.end(), ne.row_strategy.begin(), ne.row_strategy.end());
      next_mu.insert(next_mu.end(), ne.col_strategy.begin(), ne.col_strategy.end());
      rec.equilibrium_values.push_back(ne.value);
      rec.matrices.push_back(std::move(q));
    }
    rec.next_pi = TabularPolicy(ns, game.n_protagonist_actions(), next_pi);
    rec.next_mu = TabularPolicy(ns, game.n_adversary_actions(), next_mu);
    const PolicyKey next = quantize(method, rec.next_pi, rec.next_mu);
    pi = rec.next_pi;
    mu = rec.next_mu;
    history.rounds.push_back(std::move(rec));

    if (next == current) {
      history.status = SolveStatus::kConverged;
      history.period = 1;
      return history;
    }
    if (auto it = seen.find(next); it != seen.end()) {
      history.status = SolveStatus::kCycleDetected;
      history.period = k - it->second + 1;
      return history;
    }
  }
  history.status = SolveStatus::kMaxRounds;
  return history;
}

nlohmann::json policy_json(const TabularPolicy& p) {
  nlohmann::json rows = nlohmann::json::array();
  for (int s = 0; s < p.n_states(); ++s) {
    auto r = p.row(s);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return rows;
}

}  // namespace

SolveHistory run_npi(const MarkovGame& game, const TabularPolicy& pi0,
                     const TabularPolicy& mu0, const SolverOptions& opts) {
  return run(SolverMethod::kNpi, game, pi0, mu0, {}, opts);
}

SolveHistory run_api(const MarkovGame& game, const TabularPolicy& pi0,
                     const SolverOptions& opts) {
  return run(SolverMethod::kApi, game, pi0,
             TabularPolicy::uniform(game.n_states(), game.n_adversary_actions()),
             {}, opts);
}

SolveHistory run_spi(const MarkovGame& game, const TabularPolicy& pi0,
                     const TabularPolicy& mu0, const WlseConfig& cfg,
                     const SolverOptions& opts) {
  return run(SolverMethod::kSpi, game, pi0, mu0, cfg, opts);
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kConverged: return "Converged";
    case SolveStatus::kCycleDetected: return "CycleDetected";
    case SolveStatus::kMaxRounds: return "MaxRounds";
  }
  return "Unknown";
}

std::string to_string(SolverMethod method) {
  switch (method) {
    case SolverMethod::kNpi: return "NPI";
    case SolverMethod::kApi: return "API";
    case SolverMethod::kSpi: return "SPI";
  }
  return "Unknown";
}

std::string history_to_json(const SolveHistory& history) {
  using nlohmann::json;
  json j;
  j["method"] = to_string(history.method);
  if (history.method == SolverMethod::kSpi) {
    j["rho"] = history.wlse.rho;
    j["weights"] = history.wlse.weight_mode == WeightMode::kUniform ? "uniform"
                                                                    : "adversary";
  }
  j["status"] = to_string(history.status);
  j["period"] = history.period;
  json rounds = json::array();
  for (std::size_t k = 0; k < history.rounds.size(); ++k) {
    const RoundRecord& r = history.rounds[k];
    json jr;
    jr["round"] = k + 1;
    jr["pi"] = policy_json(r.pi);
    jr["mu"] = policy_json(r.mu);
    jr["value"] = r.value.values;
    jr["pev_iterations"] = r.pev_iterations;
    jr["pev_residual"] = r.pev_residual;
    jr["pev_converged"] = r.pev_converged;
    json mats = json::array();
    for (const Matrix& m : r.matrices) {
      json rows = json::array();
      for (int a = 0; a < m.rows; ++a) {
        auto row = m.row(a);
        rows.push_back(std::vector<double>(row.begin(), row.end()));
      }
      mats.push_back(std::move(rows));
    }
    jr["matrices"] = std::move(mats);
    jr["equilibrium_values"] = r.equilibrium_values;
    jr["next_pi"] = policy_json(r.next_pi);
    jr["next_mu"] = policy_json(r.next_mu);
    if (!r.reference_value.empty()) jr["reference_value"] = r.reference_value;
    rounds.push_back(std::move(jr));
  }
  j["rounds"] = std::move(rounds);
  return j.dump(2);
}

ComparisonReport compare_solvers(const MarkovGame& game,
                                 const TabularPolicy& pi0,
                                 const TabularPolicy& mu0,
                                 const std::vector<double>& rho_list,
                                 const std::vector<double>& uniform_rho_list,
                                 int max_rounds) {
  SolverOptions opts;
  opts.max_rounds = max_rounds;
  opts.warm_start = false;
  opts.compare_to_api = true;
  const TabularPolicy uniform =
      TabularPolicy::uniform(game.n_states(), game.n_adversary_actions());

  ComparisonReport report;
  report.runs.push_back(run_api(game, pi0, opts));
  for (double rho : rho_list) {
    report.runs.push_back(
        run_spi(game, pi0, mu0, {rho, WeightMode::kAdversary}, opts));
  }
  for (double rho : uniform_rho_list) {
    report.runs.push_back(
        run_spi(game, pi0, mu0, {rho, WeightMode::kUniform}, opts));
  }

  for (const SolveHistory& h : report.runs) {
    const bool api = h.method == SolverMethod::kApi;
    const bool uniform_weights = h.wlse.weight_mode == WeightMode::kUniform;
    const std::string name = api ? "API" : uniform_weights ? "SPI-u" : "SPI";
    for (std::size_t k = 0; k < h.rounds.size(); ++k) {
      const RoundRecord& r = h.rounds[k];
      const double bound =
          api ? 0.0
              : pev_error_bound(uniform_weights ? uniform : r.mu, h.wlse.rho,
                                game.gamma());
      for (int s = 0; s < game.n_states(); ++s) {
        ComparisonRow row;
        row.method = name;
        row.rho = api ? 0.0 : h.wlse.rho;
        row.round = static_cast<int>(k) + 1;
        row.state = s;
        row.value = r.value[s];
        const double ref = r.reference_value[s];
        const double gap = std::abs(row.value - ref);
        row.pct_error = ref != 0.0 ? 100.0 * gap / std::abs(ref) : 0.0;
        row.bound = bound;
        report.rows.push_back(row);
      }
    }
  }
  return report;
}

std::string comparison_csv(const ComparisonReport& report) {
  std::ostringstream os;
  os << "method,rho,round,state,value,pct_error,bound\n";
  for (const ComparisonRow& r : report.rows) {
    os << r.method << ',' << (r.method == "API" ? "" : format_sig(r.rho)) << ','
       << r.round << ',' << r.state << ',' << format_sig(r.value) << ','
       << format_sig(r.pct_error) << ',' << format_sig(r.bound) << '\n';
  }
  return os.str();
}

}  // namespace mgsmooth
