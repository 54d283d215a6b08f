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

#include "mgsmooth/matrix_game.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mgsmooth/error.h"
#include "mgsmooth/simplex.h"

namespace mgsmooth {
namespace {

std::vector<double> to_distribution(std::vector<double> x) {
  for (double& v : x) v = std::max(v, 0.0);
  const double total = std::accumulate(x.begin(), x.end(), 0.0);
  for (double& v : x) v /= total;
  return x;
}

bool try_pure_saddle(const Matrix& q, MatrixGameSolution& sol) {
  int best_row = 0;
  double minimax = std::numeric_limits<double>::infinity();
  for (int a = 0; a < q.rows; ++a) {
    auto r = q.row(a);
    const double row_max = *std::max_element(r.begin(), r.end());
    if (row_max < minimax) {
      minimax = row_max;
      best_row = a;
    }
  }
  int best_col = 0;
  double maximin = -std::numeric_limits<double>::infinity();
  for (int u = 0; u < q.cols; ++u) {
    double col_min = std::numeric_limits<double>::infinity();
    for (int a = 0; a < q.rows; ++a) col_min = std::min(col_min, q(a, u));
    if (col_min > maximin) {
      maximin = col_min;
      best_col = u;
    }
  }
  if (minimax != maximin) return false;
  sol.row_strategy.assign(static_cast<std::size_t>(q.rows), 0.0);
  sol.col_strategy.assign(static_cast<std::size_t>(q.cols), 0.0);
  sol.row_strategy[best_row] = 1.0;
  sol.col_strategy[best_col] = 1.0;
  sol.value = minimax;
  sol.primal_value = minimax;
  sol.dual_value = maximin;
  sol.is_pure = true;
  return true;
}

}  // namespace

MatrixGameSolution solve_matrix_game(const Matrix& q) {
  if (q.rows <= 0 || q.cols <= 0) {
    throw Error(ErrorCode::kDegenerateInput, "empty payoff matrix");
  }
  for (double x : q.data) {
    if (!std::isfinite(x)) {
      throw Error(ErrorCode::kDegenerateInput, "payoff matrix has NaN/Inf");
    }
  }
  MatrixGameSolution sol;
  if (!try_pure_saddle(q, sol)) {
    const double lo = *std::min_element(q.data.begin(), q.data.end());
    const double shift = 1.0 - lo;

    // Row player: max sum x  s.t.  sum_a Q'[a][u] x_a <= 1 for every u.
    lp::Problem row_lp;
    row_lp.objective.assign(static_cast<std::size_t>(q.rows), 1.0);
    row_lp.constraints = Matrix(q.cols, q.rows);
    for (int u = 0; u < q.cols; ++u) {
      for (int a = 0; a < q.rows; ++a) row_lp.constraints(u, a) = q(a, u) + shift;
    }
    row_lp.senses.assign(static_cast<std::size_t>(q.cols), lp::Sense::kLessEqual);
    row_lp.rhs.assign(static_cast<std::size_t>(q.cols), 1.0);
    row_lp.maximize = true;
    const lp::Solution row = lp::solve(row_lp);

    // Column player: min sum y  s.t.  sum_u Q'[a][u] y_u >= 1 for every a.
    lp::Problem col_lp;
    col_lp.objective.assign(static_cast<std::size_t>(q.cols), 1.0);
    col_lp.constraints = Matrix(q.rows, q.cols);
    for (int a = 0; a < q.rows; ++a) {
      for (int u = 0; u < q.cols; ++u) col_lp.constraints(a, u) = q(a, u) + shift;
    }
    col_lp.senses.assign(static_cast<std::size_t>(q.rows),
                         lp::Sense::kGreaterEqual);
    col_lp.rhs.assign(static_cast<std::size_t>(q.rows), 1.0);
    col_lp.maximize = false;
    const lp::Solution col = lp::solve(col_lp);

    if (row.status != lp::Status::kOptimal || col.status != lp::Status::kOptimal) {
      throw Error(ErrorCode::kDegenerateInput, "matrix game LP did not solve");
    }
    sol.row_strategy = to_distribution(row.x);
    sol.col_strategy = to_distribution(col.x);
    sol.primal_value = 1.0 / row.objective - shift;
    sol.dual_value = 1.0 / col.objective - shift;
    sol.value = sol.primal_value;
    auto single = [](const std::vector<double>& p) {
      return std::count(p.begin(), p.end(), 1.0) == 1;
    };
    sol.is_pure = single(sol.row_strategy) && single(sol.col_strategy);
  }
  sol.slackness_max_violation = verify_slackness(q, sol);
  return sol;
}

double verify_slackness(const Matrix& q, const MatrixGameSolution& sol) {
  if (static_cast<int>(sol.row_strategy.size()) != q.rows ||
      static_cast<int>(sol.col_strategy.size()) != q.cols) {
    throw Error(ErrorCode::kDimensionMismatch, "strategy sizes");
  }
  double worst = 0.0;
  for (int u = 0; u < q.cols; ++u) {
    double payoff = 0.0;
    for (int a = 0; a < q.rows; ++a) payoff += sol.row_strategy[a] * q(a, u);
    worst = std::max(worst, std::abs(sol.col_strategy[u] * (payoff - sol.value)));
  }
  for (int a = 0; a < q.rows; ++a) {
    double payoff = 0.0;
    for (int u = 0; u < q.cols; ++u) payoff += q(a, u) * sol.col_strategy[u];
    worst = std::max(worst, std::abs(sol.row_strategy[a] * (payoff - sol.value)));
  }
  return worst;
}

}  // namespace mgsmooth
