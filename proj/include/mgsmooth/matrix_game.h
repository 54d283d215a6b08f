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

#ifndef MGSMOOTH_MATRIX_GAME_H_
#define MGSMOOTH_MATRIX_GAME_H_

#include <vector>

#include "mgsmooth/dense.h"

namespace mgsmooth {

// Mixed Nash equilibrium of a zero-sum matrix game Q[a][u]. The row player
// (protagonist) minimizes, the column player (adversary) maximizes.
struct MatrixGameSolution {
  std::vector<double> row_strategy;
  std::vector<double> col_strategy;
  double value = 0.0;
  bool is_pure = false;
  double slackness_max_violation = 0.0;
  // Optimal values of the row player's LP and of the column player's LP,
  // solved independently. They coincide by strong duality.
  double primal_value = 0.0;
  double dual_value = 0.0;
};

// Returns a pure saddle point directly when one exists; otherwise solves the
// two dual LPs with the simplex method on a positively shifted payoff.
// Equilibrium strategies need not be unique; the value is.
// Throws kDegenerateInput on empty or non-finite input.
MatrixGameSolution solve_matrix_game(const Matrix& q);

// max over columns of |mu(u) (pi^T Q[:,u] - value)| and the row analogue.
double verify_slackness(const Matrix& q, const MatrixGameSolution& sol);

}  // namespace mgsmooth

#endif  // MGSMOOTH_MATRIX_GAME_H_
