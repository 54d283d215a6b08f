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

#ifndef MGSMOOTH_BELLMAN_H_
#define MGSMOOTH_BELLMAN_H_

#include <span>
#include <string>
#include <vector>

#include "mgsmooth/game.h"

namespace mgsmooth {

enum class WeightMode {
  kAdversary,  // weights are the adversary policy mu(.|s)
  kUniform,    // weights are 1/|U| regardless of mu
};

struct WlseConfig {
  double rho = 1.0;
  WeightMode weight_mode = WeightMode::kAdversary;
};

// Weighted LogSumExp: (1/rho) log sum_i w_i exp(rho x_i), evaluated with a
// max shift. Entries with w_i == 0 are skipped, so they contribute exactly
// nothing even when x_i is huge.
// Throws kEmptyInput, kWeightMismatch, kAllWeightsZero, kInvalidArgument.
double wlse(std::span<const double> values, std::span<const double> weights,
            double rho);

// |log w_m| / rho, the gap between max(x) and wlse(x) when w_m is the weight
// on the arg-max. Throws kZeroWeight for w_m == 0.
double wlse_error_bound(double w_m, double rho);

enum class OperatorKind { kJoint, kWorstCase, kWlse };

// A Bellman operator bound to a game and policies. Policies are copied; the
// game is referenced and must outlive the operator.
class BellmanOperator {
 public:
  static BellmanOperator joint(const MarkovGame& game, TabularPolicy pi,
                               TabularPolicy mu);
  static BellmanOperator worst_case(const MarkovGame& game, TabularPolicy pi);
  static BellmanOperator smoothed(const MarkovGame& game, TabularPolicy pi,
                                  TabularPolicy mu, WlseConfig cfg);
  static BellmanOperator joint(MarkovGame&&, TabularPolicy, TabularPolicy) = delete;
  static BellmanOperator worst_case(MarkovGame&&, TabularPolicy) = delete;
  static BellmanOperator smoothed(MarkovGame&&, TabularPolicy, TabularPolicy,
                                  WlseConfig) = delete;

  OperatorKind kind() const { return kind_; }
  const MarkovGame& game() const { return *game_; }

  const TabularPolicy& protagonist() const { return pi_; }
  const WlseConfig& config() const { return cfg_; }
  // WLSE weights at state s (adversary row or uniform).
  std::span<const double> weights(int s) const;
  double weight(int s, int u) const { return weights(s)[u]; }

  // x_u = sum_a pi(a|s) sum_s' p [r + gamma v(s')], written into out.
  void adversary_branch_values(const ValueTable& v, int s,
                               std::span<double> out) const;

  // One backup at a single state. Every entry point below routes through
  // this, so the reduction order per state is fixed.
  double backup(const ValueTable& v, int s) const;

  // OpenMP over states; bitwise identical to apply_serial().
  ValueTable apply(const ValueTable& v) const;
  ValueTable apply_serial(const ValueTable& v) const;

 private:
  BellmanOperator(OperatorKind kind, const MarkovGame& game, TabularPolicy pi,
                  TabularPolicy mu, WlseConfig cfg);

  OperatorKind kind_;
  const MarkovGame* game_;
  TabularPolicy pi_;
  TabularPolicy mu_;  // empty for the worst-case operator
  WlseConfig cfg_;
  std::vector<double> uniform_weights_;
};

// T^{pi,mu} V.
ValueTable apply_joint_operator(const MarkovGame& game, const TabularPolicy& pi,
                                const TabularPolicy& mu, const ValueTable& v);
// T^{pi} V with an exact max over adversary actions.
ValueTable apply_worstcase_operator(const MarkovGame& game,
                                    const TabularPolicy& pi,
                                    const ValueTable& v);
// Smoothed worst-case operator (WLSE over adversary actions).
ValueTable apply_wlse_operator(const MarkovGame& game, const TabularPolicy& pi,
                               const TabularPolicy& mu, const WlseConfig& cfg,
                               const ValueTable& v);

struct PevOptions {
  double tol = 1e-9;
  int max_iter = 10000;
};

struct PevTrace {
  // values[j] is the table after j applications; values[0] is the start.
  std::vector<std::vector<double>> values;
  // residuals[j] = ||values[j+1] - values[j]||_inf.
  std::vector<double> residuals;
  bool converged = false;
  int iterations = 0;
};

struct PevResult {
  ValueTable value;
  PevTrace trace;
};

// Fixed-point iteration of op from v0 until the inf-norm residual drops to
// tol or max_iter is reached. Non-convergence is reported through
// trace.converged rather than thrown.
PevResult pev_fixed_point(const BellmanOperator& op, ValueTable v0,
                          const PevOptions& opts = {});

// Rows: iteration, state_0_value, ..., residual (iterations 1..n).
std::string pev_trace_csv(const PevTrace& trace);

// max_s |log max_u mu(u|s)| / (rho (1 - gamma)).
// This uses the largest adversary probability per state. It bounds the
// smoothed-vs-exact PEV gap only when that most likely action is also the
// worst-case action (as in the two-state counterexample); for arbitrary
// games use certified_pev_error_bound.
double pev_error_bound(const TabularPolicy& mu, double rho, double gamma);

// max_s |log w(u*_s|s)| / (rho (1 - gamma)), where u*_s is the worst-case
// adversary action at the smoothed fixed point v_rho and w the operator's
// weights. Holds for every game. Returns +inf if some w(u*_s|s) is zero.
double certified_pev_error_bound(const BellmanOperator& smoothed,
                                 const ValueTable& v_rho);
// 2 gamma / (1 - gamma)^3 * max_s |log max_u mu(u|s)| / rho.
double optimality_error_bound(const TabularPolicy& mu, double rho,
                              double gamma);

}  // namespace mgsmooth

#endif  // MGSMOOTH_BELLMAN_H_
