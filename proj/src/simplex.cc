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

#include "mgsmooth/simplex.h"

#include <cmath>
#include <limits>

#include "mgsmooth/error.h"

namespace mgsmooth::lp {
namespace {

constexpr double kEps = 1e-11;

class Tableau {
 public:
  Tableau(int rows, int cols) : t_(rows, cols + 1), basis_(rows, -1) {}

  double& at(int r, int c) { return t_(r, c); }
  double& rhs(int r) { return t_(r, t_.cols - 1); }
  int rows() const { return t_.rows; }
  int cols() const { return t_.cols - 1; }
  std::vector<int>& basis() { return basis_; }

  void pivot(int pr, int pc) {
    const int width = t_.cols;
    const double inv = 1.0 / t_(pr, pc);
    for (int c = 0; c < width; ++c) t_(pr, c) *= inv;
    t_(pr, pc) = 1.0;
    for (int r = 0; r < t_.rows; ++r) {
      if (r == pr) continue;
      const double f = t_(r, pc);
      if (f == 0.0) continue;
      for (int c = 0; c < width; ++c) t_(r, c) -= f * t_(pr, c);
      t_(r, pc) = 0.0;
    }
    basis_[pr] = pc;
  }

  // Maximizes cost.x over the columns flagged in `allowed`. Returns false if
  // unbounded.
  bool optimize(const std::vector<double>& cost,
                const std::vector<bool>& allowed, int& pivots) {
    const int max_pivots = 50000;
    while (pivots < max_pivots) {
      int enter = -1;
      for (int c = 0; c < cols(); ++c) {
        if (!allowed[c]) continue;
        double reduced = cost[c];
        for (int r = 0; r < rows(); ++r) reduced -= cost[basis_[r]] * at(r, c);
        if (reduced > kEps) {
          enter = c;  // Bland: lowest improving index
          break;
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int r = 0; r < rows(); ++r) {
        const double a = at(r, enter);
        if (a <= kEps) continue;
        const double ratio = rhs(r) / a;
        if (leave < 0 || ratio < best - kEps ||
            (std::abs(ratio - best) <= kEps && basis_[r] < basis_[leave])) {
          best = ratio;
          leave = r;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
      ++pivots;
    }
    throw Error(ErrorCode::kDegenerateInput, "simplex pivot limit reached");
  }

 private:
  Matrix t_;
  std::vector<int> basis_;
};

}  // namespace

Solution solve(const Problem& problem) {
  const int m = problem.constraints.rows;
  const int n = problem.constraints.cols;
  if (static_cast<int>(problem.objective.size()) != n ||
      static_cast<int>(problem.senses.size()) != m ||
      static_cast<int>(problem.rhs.size()) != m) {
    throw Error(ErrorCode::kDimensionMismatch, "LP dimensions");
  }
  // Normalize every row to a non-negative right-hand side.
  Matrix a = problem.constraints;
  std::vector<double> b = problem.rhs;
  std::vector<Sense> sense = problem.senses;
  for (int r = 0; r < m; ++r) {
    if (b[r] < 0.0) {
      for (int c = 0; c < n; ++c) a(r, c) = -a(r, c);
      b[r] = -b[r];
      if (sense[r] == Sense::kLessEqual) {
        sense[r] = Sense::kGreaterEqual;
      } else if (sense[r] == Sense::kGreaterEqual) {
        sense[r] = Sense::kLessEqual;
      }
    }
  }
  int n_slack = 0;
  int n_art = 0;
  for (Sense s : sense) {
    if (s != Sense::kEqual) ++n_slack;
    if (s != Sense::kLessEqual) ++n_art;
  }
  const int total = n + n_slack + n_art;
  const int art_begin = n + n_slack;
  Tableau tab(m, total);
  int slack = n;
  int art = art_begin;
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < n; ++c) tab.at(r, c) = a(r, c);
    tab.rhs(r) = b[r];
    switch (sense[r]) {
      case Sense::kLessEqual:
        tab.at(r, slack) = 1.0;
        tab.basis()[r] = slack++;
        break;
      case Sense::kGreaterEqual:
        tab.at(r, slack++) = -1.0;
        tab.at(r, art) = 1.0;
        tab.basis()[r] = art++;
        break;
      case Sense::kEqual:
        tab.at(r, art) = 1.0;
        tab.basis()[r] = art++;
        break;
    }
  }

  Solution sol;
  std::vector<bool> allowed(static_cast<std::size_t>(total), true);
  if (n_art > 0) {
    std::vector<double> phase1(static_cast<std::size_t>(total), 0.0);
    for (int c = art_begin; c < total; ++c) phase1[c] = -1.0;
    tab.optimize(phase1, allowed, sol.pivots);
    double infeasibility = 0.0;
    for (int r = 0; r < m; ++r) {
      if (tab.basis()[r] >= art_begin) infeasibility += tab.rhs(r);
    }
    if (infeasibility > 1e-9) {
      sol.status = Status::kInfeasible;
      return sol;
    }
    // Drive zero-level artificials out of the basis where possible.
    for (int r = 0; r < m; ++r) {
      if (tab.basis()[r] < art_begin) continue;
      for (int c = 0; c < art_begin; ++c) {
        if (std::abs(tab.at(r, c)) > kEps) {
          tab.pivot(r, c);
          ++sol.pivots;
          break;
        }
      }
    }
    for (int c = art_begin; c < total; ++c) allowed[c] = false;
  }

  std::vector<double> cost(static_cast<std::size_t>(total), 0.0);
  const double sign = problem.maximize ? 1.0 : -1.0;
  for (int c = 0; c < n; ++c) cost[c] = sign * problem.objective[c];
  if (!tab.optimize(cost, allowed, sol.pivots)) {
    sol.status = Status::kUnbounded;
    return sol;
  }
  sol.x.assign(static_cast<std::size_t>(n), 0.0);
  for (int r = 0; r < m; ++r) {
    if (tab.basis()[r] < n) sol.x[tab.basis()[r]] = tab.rhs(r);
  }
  sol.objective = 0.0;
  for (int c = 0; c < n; ++c) sol.objective += problem.objective[c] * sol.x[c];
  sol.status = Status::kOptimal;
  return sol;
}

}  // namespace mgsmooth::lp
