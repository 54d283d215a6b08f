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


#include "mgsmooth/experiments.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mgsmooth/bellman.h"
#include "mgsmooth/error.h"
#include "mgsmooth/format.h"
#include "mgsmooth/game.h"
#include "mgsmooth/nn.h"
#include "mgsmooth/pi_solvers.h"

namespace mgsmooth {
namespace {

using nlohmann::json;

TabularPolicy start_pi() { return TabularPolicy::from_rows({{0.5, 0.5}, {0.5, 0.5}}); }
TabularPolicy start_mu() { return TabularPolicy::from_rows({{0.45, 0.55}, {0.45, 0.55}}); }

// Value of s1 for each method in the given round.
std::string table_csv(const ComparisonReport& report, int round) {
  std::ostringstream os;
  os << "method,rho,value,pct_error\n";
  for (const ComparisonRow& r : report.rows) {
    if (r.round != round || r.state != 0) continue;
    os << r.method << ',' << (r.method == "API" ? "" : format_sig(r.rho)) << ','
       << format_sig(r.value) << ',' << format_sig(r.pct_error) << '\n';
  }
  return os.str();
}

std::string pev_trace(const MarkovGame& g) {
  struct Run {
    std::string method;
    double rho;
    BellmanOperator op;
  };
  std::vector<Run> runs;
  runs.push_back({"API", 0.0, BellmanOperator::worst_case(g, start_pi())});
  for (double rho : table_rhos()) {
    runs.push_back({"SPI", rho,
                    BellmanOperator::smoothed(g, start_pi(), start_mu(),
                                              {rho, WeightMode::kAdversary})});
  }
  for (double rho : table_uniform_rhos()) {
    runs.push_back({"SPI-u", rho,
                    BellmanOperator::smoothed(g, start_pi(), start_mu(),
                                              {rho, WeightMode::kUniform})});
  }
  std::ostringstream os;
  os << "method,rho,iteration,v_s1,v_s2,residual\n";
  for (const Run& run : runs) {
    const PevTrace t = pev_fixed_point(run.op, ValueTable::zeros(g.n_states())).trace;
    for (std::size_t j = 1; j < t.values.size(); ++j) {
      os << run.method << ',' << (run.method == "API" ? "" : format_sig(run.rho)) << ','
         << j << ',' << format_sig(t.values[j][0]) << ',' << format_sig(t.values[j][1])
         << ',' << format_sig(t.residuals[j - 1]) << '\n';
    }
  }
  return os.str();
}

std::string npi_cycle(const MarkovGame& g) {
  const SolveHistory h = run_npi(g, TabularPolicy::deterministic(2, {0, 0}),
                                 TabularPolicy::deterministic(2, {0, 0}));
  json j;
  j["status"] = to_string(h.status);
  j["period"] = h.period;
  json values = json::array();
  for (const RoundRecord& r : h.rounds) values.push_back(r.value[0]);
  j["values"] = std::move(values);
  j["history"] = json::parse(history_to_json(h));
  return j.dump(2) + "\n";
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (int a = 0; a < m.rows; ++a) {
    auto row = m.row(a);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

void append_matrices(json& out, const SolveHistory& h) {
  for (std::size_t k = 0; k < h.rounds.size(); ++k) {
    const RoundRecord& r = h.rounds[k];
    for (std::size_t s = 0; s < r.matrices.size(); ++s) {
      json e;
      e["method"] = to_string(h.method);
      if (h.method == SolverMethod::kSpi) {
        e["rho"] = h.wlse.rho;
        e["weights"] = h.wlse.weight_mode == WeightMode::kUniform ? "uniform" : "adversary";
      }
      e["round"] = k + 1;
      e["state"] = s;
      e["value"] = r.value.values;
      e["matrix"] = matrix_json(r.matrices[s]);
      e["equilibrium_value"] = r.equilibrium_values[s];
      out.push_back(std::move(e));
    }
  }
}

std::string matrices(const MarkovGame& g, const ComparisonReport& report) {
  json out = json::array();
  append_matrices(out, run_npi(g, TabularPolicy::deterministic(2, {0, 0}),
                               TabularPolicy::deterministic(2, {0, 0})));
  for (const SolveHistory& h : report.runs) append_matrices(out, h);
  return out.dump(1) + "\n";
}

// Smoothed-vs-exact evaluation gap of pi0 against the bounds, per rho.
std::string bounds(const MarkovGame& g) {
  const TabularPolicy pi = start_pi();
  const TabularPolicy mu = start_mu();
  const ValueTable exact =
      pev_fixed_point(BellmanOperator::worst_case(g, pi), ValueTable::zeros(2)).value;
  std::ostringstream os;
  os << "rho,v_spi,v_api,abs_error,pev_bound,certified_bound,optimality_bound,within_bound\n";
  for (double rho : table_rhos()) {
    const BellmanOperator op = BellmanOperator::smoothed(g, pi, mu, {rho, WeightMode::kAdversary});
    const ValueTable v = pev_fixed_point(op, ValueTable::zeros(2)).value;
    double gap = 0.0;
    for (int s = 0; s < g.n_states(); ++s) gap = std::max(gap, std::abs(v[s] - exact[s]));
    const double bound = pev_error_bound(mu, rho, g.gamma());
    os << format_sig(rho) << ',' << format_sig(v[0]) << ',' << format_sig(exact[0]) << ','
       << format_sig(gap) << ',' << format_sig(bound) << ','
       << format_sig(certified_pev_error_bound(op, v)) << ','
       << format_sig(optimality_error_bound(mu, rho, g.gamma())) << ','
       << (gap <= bound ? "true" : "false") << '\n';
  }
  return os.str();
}

}  // namespace

std::vector<double> table_rhos() { return {1.0, 5.0, 10.0, 20.0}; }
std::vector<double> table_uniform_rhos() { return {10.0}; }

Artifacts tabular_artifacts() {
  const MarkovGame g = two_state_counterexample();
  const ComparisonReport report =
      compare_solvers(g, start_pi(), start_mu(), table_rhos(), table_uniform_rhos());
  return {{"table1.csv", table_csv(report, 1)},
          {"table2.csv", table_csv(report, 2)},
          {"pev_trace.csv", pev_trace(g)},
          {"npi_cycle.json", npi_cycle(g)},
          {"matrices.json", matrices(g, report)},
          {"bounds.csv", bounds(g)}};
}

Artifacts train_artifacts(const saac::TrainConfig& cfg, saac::TrainResult* result) {
  saac::TrainResult r = saac::train(cfg);
  const std::string algo = saac::to_string(cfg.algorithm);
  Artifacts out = {
      {"metrics_" + algo + ".csv", saac::metrics_csv(r.history)},
      {"config_" + algo + ".txt", saac::config_to_string(cfg)},
      {"final_" + algo + ".json", nn::checkpoint_to_string(r.final_nets.named()) + "\n"},
      {"best_" + algo + ".json", nn::checkpoint_to_string(r.best_nets.named()) + "\n"}};
  if (result != nullptr) *result = std::move(r);
  return out;
}

std::string eval_json(const saac::EvalResult& r, int episodes, int steps,
                      std::uint64_t eval_seed, double disturbance) {
  json j;
  j["tar"] = r.tar;
  j["pos_err"] = r.pos_err;
  j["head_err"] = r.head_err;
  j["episodes"] = episodes;
  j["steps"] = steps;
  j["eval_seed"] = eval_seed;
  j["disturbance"] = disturbance;
  return j.dump(2) + "\n";
}

std::string gradcheck_csv(const std::vector<saac::GradCheckEntry>& entries) {
  std::ostringstream os;
  os << "name,rel_error,tolerance,passed\n";
  for (const saac::GradCheckEntry& e : entries) {
    os << e.name << ',' << format_sig(e.rel_error) << ',' << format_sig(e.tolerance) << ','
       << (e.passed() ? "true" : "false") << '\n';
  }
  return os.str();
}

std::vector<double> parse_grid(const std::string& text) {
  double v[3];
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) {
    const std::size_t end = i < 2 ? text.find(':', pos) : text.size();
    if (end == std::string::npos) throw Error(ErrorCode::kConfigError, "grid must be lo:step:hi");
    const std::string part = text.substr(pos, end - pos);
    std::size_t used = 0;
    try {
      v[i] = std::stod(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != part.size()) {
      throw Error(ErrorCode::kConfigError, "bad grid value '" + part + "'");
    }
    pos = end + 1;
  }
  return saac::disturbance_grid(v[0], v[1], v[2]);
}

void write_artifacts(const std::string& dir, const Artifacts& files) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir + ": " + ec.message());
  for (const Artifact& a : files) {
    const std::filesystem::path path = std::filesystem::path(dir) / a.name;
    std::ofstream f(path, std::ios::binary);
    f << a.content;
    if (!f) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  }
}

}  // namespace mgsmooth
