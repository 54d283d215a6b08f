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

#include "mgsmooth/bellman.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mgsmooth/error.h"
#include "mgsmooth/format.h"

namespace mgsmooth {

double wlse(std::span<const double> values, std::span<const double> weights,
            double rho) {
  if (values.empty()) throw Error(ErrorCode::kEmptyInput, "wlse of nothing");
  if (values.size() != weights.size()) {
    throw Error(ErrorCode::kWeightMismatch, "values and weights differ in length");
  }
  if (!(rho > 0.0)) throw Error(ErrorCode::kInvalidArgument, "rho must be > 0");
  double m = -std::numeric_limits<double>::infinity();
  double total_weight = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (weights[i] < 0.0) {
      throw Error(ErrorCode::kWeightMismatch, "negative weight");
    }
    if (weights[i] > 0.0) {
      m = std::max(m, values[i]);
      total_weight += weights[i];
    }
  }
  if (total_weight == 0.0) {
    throw Error(ErrorCode::kAllWeightsZero, "every weight is zero");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (weights[i] > 0.0) acc += weights[i] * std::exp(rho * (values[i] - m));
  }
  return m + std::log(acc) / rho;
}

double wlse_error_bound(double w_m, double rho) {
  if (w_m == 0.0) {
    throw Error(ErrorCode::kZeroWeight, "zero weight on the maximum is unbounded");
  }
  if (!(w_m > 0.0 && w_m <= 1.0) || !(rho > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "need w_m in (0,1] and rho > 0");
  }
  return std::abs(std::log(w_m)) / rho;
}

BellmanOperator::BellmanOperator(OperatorKind kind, const MarkovGame& game,
                                 TabularPolicy pi, TabularPolicy mu,
                                 WlseConfig cfg)
    : kind_(kind), game_(&game), pi_(std::move(pi)), mu_(std::move(mu)),
      cfg_(cfg) {
  if (pi_.n_states() != game.n_states() ||
      pi_.n_actions() != game.n_protagonist_actions()) {
    throw Error(ErrorCode::kPolicyShapeMismatch, "protagonist policy shape");
  }
  if (kind != OperatorKind::kWorstCase &&
      (mu_.n_states() != game.n_states() ||
       mu_.n_actions() != game.n_adversary_actions())) {
    throw Error(ErrorCode::kPolicyShapeMismatch, "adversary policy shape");
  }
  if (kind == OperatorKind::kWlse && !(cfg.rho > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "rho must be > 0");
  }
  uniform_weights_.assign(static_cast<std::size_t>(game.n_adversary_actions()),
                          1.0 / game.n_adversary_actions());
}

BellmanOperator BellmanOperator::joint(const MarkovGame& game,
                                       TabularPolicy pi, TabularPolicy mu) {
  return BellmanOperator(OperatorKind::kJoint, game, std::move(pi),
                         std::move(mu), {});
}

BellmanOperator BellmanOperator::worst_case(const MarkovGame& game,
                                            TabularPolicy pi) {
  return BellmanOperator(OperatorKind::kWorstCase, game, std::move(pi), {}, {});
}

BellmanOperator BellmanOperator::smoothed(const MarkovGame& game,
                                          TabularPolicy pi, TabularPolicy mu,
                                          WlseConfig cfg) {
  return BellmanOperator(OperatorKind::kWlse, game, std::move(pi),
                         std::move(mu), cfg);
}

void BellmanOperator::adversary_branch_values(const ValueTable& v, int s,
                                              std::span<double> out) const {
  const MarkovGame& g = *game_;
  const int ns = g.n_states();
  const double gamma = g.gamma();
  auto pi_row = pi_.row(s);
  for (int u = 0; u < g.n_adversary_actions(); ++u) {
    double x = 0.0;
    for (int a = 0; a < g.n_protagonist_actions(); ++a) {
      if (pi_row[a] == 0.0) continue;
      auto p = g.transition_row(s, a, u);
      double backed = 0.0;
      for (int next = 0; next < ns; ++next) {
        backed += p[next] * (g.reward(s, a, u) + gamma * v.values[next]);
      }
      x += pi_row[a] * backed;
    }
    out[u] = x;
  }
}

std::span<const double> BellmanOperator::weights(int s) const {
  return cfg_.weight_mode == WeightMode::kUniform
             ? std::span<const double>(uniform_weights_)
             : mu_.row(s);
}

double BellmanOperator::backup(const ValueTable& v, int s) const {
  const int nu = game_->n_adversary_actions();
  // Adversary action sets are tiny; a fixed-size buffer avoids a heap
  // allocation per state.
  double stack_buf[32];
  std::vector<double> heap_buf;
  std::span<double> x;
  if (nu <= 32) {
    x = std::span<double>(stack_buf, static_cast<std::size_t>(nu));
  } else {
    heap_buf.resize(static_cast<std::size_t>(nu));
    x = heap_buf;
  }
  adversary_branch_values(v, s, x);
  switch (kind_) {
    case OperatorKind::kJoint: {
      auto mu_row = mu_.row(s);
      double total = 0.0;
      for (int u = 0; u < nu; ++u) total += mu_row[u] * x[u];
      return total;
    }
    case OperatorKind::kWorstCase:
      return *std::max_element(x.begin(), x.end());
    case OperatorKind::kWlse: {
      return wlse(x, weights(s), cfg_.rho);
    }
  }
  return 0.0;
}

ValueTable BellmanOperator::apply(const ValueTable& v) const {
  const int ns = game_->n_states();
  if (v.size() != ns) {
    throw Error(ErrorCode::kDimensionMismatch, "value table size");
  }
  ValueTable out = ValueTable::zeros(ns);
#pragma omp parallel for schedule(static) if (ns >= 64)
  for (int s = 0; s < ns; ++s) out.values[s] = backup(v, s);
  out.residual = max_abs_diff(out.values, v.values);
  return out;
}

ValueTable BellmanOperator::apply_serial(const ValueTable& v) const {
  const int ns = game_->n_states();
  if (v.size() != ns) {
    throw Error(ErrorCode::kDimensionMismatch, "value table size");
  }
  ValueTable out = ValueTable::zeros(ns);
  for (int s = 0; s < ns; ++s) out.values[s] = backup(v, s);
  out.residual = max_abs_diff(out.values, v.values);
  return out;
}

ValueTable apply_joint_operator(const MarkovGame& game, const TabularPolicy& pi,
                                const TabularPolicy& mu, const ValueTable& v) {
  return BellmanOperator::joint(game, pi, mu).apply(v);
}

ValueTable apply_worstcase_operator(const MarkovGame& game,
                                    const TabularPolicy& pi,
                                    const ValueTable& v) {
  return BellmanOperator::worst_case(game, pi).apply(v);
}

ValueTable apply_wlse_operator(const MarkovGame& game, const TabularPolicy& pi,
                               const TabularPolicy& mu, const WlseConfig& cfg,
                               const ValueTable& v) {
  return BellmanOperator::smoothed(game, pi, mu, cfg).apply(v);
}

PevResult pev_fixed_point(const BellmanOperator& op, ValueTable v0,
                          const PevOptions& opts) {
  if (!(opts.tol > 0.0) || opts.max_iter < 1) {
    throw Error(ErrorCode::kInvalidArgument, "need tol > 0 and max_iter >= 1");
  }
  PevResult result;
  result.trace.values.push_back(v0.values);
  ValueTable v = std::move(v0);
  for (int j = 0; j < opts.max_iter; ++j) {
    ValueTable next = op.apply(v);
    result.trace.values.push_back(next.values);
    result.trace.residuals.push_back(next.residual);
    result.trace.iterations = j + 1;
    v = std::move(next);
    if (v.residual <= opts.tol) {
      result.trace.converged = true;
      break;
    }
  }
  result.value = std::move(v);
  return result;
}

std::string pev_trace_csv(const PevTrace& trace) {
  std::ostringstream os;
  const std::size_t ns = trace.values.empty() ? 0 : trace.values.front().size();
  os << "iteration";
  for (std::size_t s = 0; s < ns; ++s) os << ",state_" << s << "_value";
  os << ",residual\n";
  for (std::size_t j = 0; j < trace.residuals.size(); ++j) {
    os << j + 1;
    for (double x : trace.values[j + 1]) os << ',' << format_sig(x, 10);
    os << ',' << format_sig(trace.residuals[j], 10) << '\n';
  }
  return os.str();
}

namespace {

double max_log_row_max(const TabularPolicy& mu) {
  double worst = 0.0;
  for (double m : mu.row_max()) worst = std::max(worst, std::abs(std::log(m)));
  return worst;
}

}  // namespace

double pev_error_bound(const TabularPolicy& mu, double rho, double gamma) {
  if (!(rho > 0.0) || !(gamma >= 0.0 && gamma < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "need rho > 0, gamma in [0,1)");
  }
  return max_log_row_max(mu) / (rho * (1.0 - gamma));
}

double certified_pev_error_bound(const BellmanOperator& smoothed,
                                 const ValueTable& v_rho) {
  if (smoothed.kind() != OperatorKind::kWlse) {
    throw Error(ErrorCode::kInvalidArgument, "needs a smoothed operator");
  }
  const MarkovGame& g = smoothed.game();
  const int nu = g.n_adversary_actions();
  std::vector<double> x(static_cast<std::size_t>(nu));
  double worst = 0.0;
  for (int s = 0; s < g.n_states(); ++s) {
    smoothed.adversary_branch_values(v_rho, s, x);
    const int star = static_cast<int>(std::max_element(x.begin(), x.end()) - x.begin());
    const double w = smoothed.weight(s, star);
    if (w == 0.0) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, std::abs(std::log(w)));
  }
  return worst / (smoothed.config().rho * (1.0 - g.gamma()));
}

double optimality_error_bound(const TabularPolicy& mu, double rho,
                              double gamma) {
  if (!(rho > 0.0) || !(gamma >= 0.0 && gamma < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "need rho > 0, gamma in [0,1)");
  }
  const double one_minus = 1.0 - gamma;
  return 2.0 * gamma / (one_minus * one_minus * one_minus) *
         max_log_row_max(mu) / rho;
}

}  // namespace mgsmooth
