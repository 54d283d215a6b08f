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

#ifndef MGSMOOTH_GAME_H_
#define MGSMOOTH_GAME_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mgsmooth/dense.h"

namespace mgsmooth {

// Finite two-player zero-sum Markov game. The protagonist (actions a)
// minimizes the discounted reward, the adversary (actions u) maximizes it.
// Immutable after construction; make_game() is the only way in.
class MarkovGame {
 public:
  int n_states() const { return n_states_; }
  int n_protagonist_actions() const { return n_pa_; }
  int n_adversary_actions() const { return n_aa_; }
  double gamma() const { return gamma_; }

  // p(s'|s,a,u) for all s', as a contiguous row.
  std::span<const double> transition_row(int s, int a, int u) const {
    return {transition_.data() + cell(s, a, u) * n_states_,
            static_cast<std::size_t>(n_states_)};
  }
  double transition(int s, int a, int u, int next) const {
    return transition_[cell(s, a, u) * n_states_ + next];
  }
  double reward(int s, int a, int u) const { return reward_[cell(s, a, u)]; }

  const std::vector<double>& flat_transition() const { return transition_; }
  const std::vector<double>& flat_reward() const { return reward_; }

 private:
  friend MarkovGame make_game(int, int, int, std::vector<double>,
                              std::vector<double>, double);

  std::size_t cell(int s, int a, int u) const {
    return (static_cast<std::size_t>(s) * n_pa_ + a) * n_aa_ + u;
  }

  int n_states_ = 0;
  int n_pa_ = 0;
  int n_aa_ = 0;
  double gamma_ = 0.0;
  std::vector<double> transition_;  // [s][a][u][s']
  std::vector<double> reward_;      // [s][a][u]
};

// Validates and builds a game from flat row-major tensors. Transition rows
// may deviate from 1 by up to 1e-9 and are renormalized.
// Throws Error{kDimensionMismatch, kInvalidDistribution, kInvalidDiscount}.
MarkovGame make_game(int n_states, int n_pa, int n_aa,
                     std::vector<double> transition, std::vector<double> reward,
                     double gamma);

// Re-runs every construction check on an existing game.
void validate(const MarkovGame& game);

// The classical two-state counterexample on which naive policy iteration
// oscillates. s2 (index 1) is absorbing with zero reward; gamma = 0.75.
MarkovGame two_state_counterexample();

// Per-state distribution over one player's actions.
class TabularPolicy {
 public:
  TabularPolicy() = default;
  // Rows are validated (non-negative, sum to 1 within 1e-9) and renormalized.
  TabularPolicy(int n_states, int n_actions, std::vector<double> probs);

  static TabularPolicy uniform(int n_states, int n_actions);
  // One action per state with probability one.
  static TabularPolicy deterministic(int n_actions,
                                     const std::vector<int>& actions);
  static TabularPolicy from_rows(const std::vector<std::vector<double>>& rows);

  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }
  std::span<const double> row(int s) const {
    return {probs_.data() + static_cast<std::size_t>(s) * n_actions_,
            static_cast<std::size_t>(n_actions_)};
  }
  double operator()(int s, int a) const {
    return probs_[static_cast<std::size_t>(s) * n_actions_ + a];
  }
  const std::vector<double>& flat() const { return probs_; }

  // Largest probability in each state's row.
  std::vector<double> row_max() const;

  friend bool operator==(const TabularPolicy&, const TabularPolicy&) = default;

 private:
  int n_states_ = 0;
  int n_actions_ = 0;
  std::vector<double> probs_;
};

struct ValueTable {
  std::vector<double> values;
  // Infinity-norm size of the update that produced this table.
  double residual = 0.0;

  static ValueTable zeros(int n_states) {
    return {std::vector<double>(static_cast<std::size_t>(n_states), 0.0), 0.0};
  }
  double operator[](int s) const { return values[static_cast<std::size_t>(s)]; }
  int size() const { return static_cast<int>(values.size()); }
};

double max_abs_diff(std::span<const double> x, std::span<const double> y);

// Q[a][u] = r(s,a,u) + gamma * sum_s' p(s'|s,a,u) v(s').
Matrix joint_q_matrix(const MarkovGame& game, const ValueTable& v, int s);

// JSON form: {"n_states","n_pa","n_aa","gamma","transition","reward"} with
// nested arrays [s][a][u][s'] and [s][a][u]. Loading applies make_game's
// validation.
std::string game_to_json(const MarkovGame& game);
MarkovGame game_from_json(const std::string& text);
MarkovGame load_game(const std::string& path);

}  // namespace mgsmooth

#endif  // MGSMOOTH_GAME_H_
