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

#include "mgsmooth/game.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mgsmooth/error.h"

namespace mgsmooth {
namespace {

constexpr double kInputRowTolerance = 1e-9;

// Checks a probability row and rescales it to sum to one.
void normalize_row(std::span<double> row, const std::string& where) {
  double total = 0.0;
  for (double p : row) {
    if (!std::isfinite(p) || p < 0.0) {
      throw Error(ErrorCode::kInvalidDistribution,
                  where + " has a negative or non-finite entry");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > kInputRowTolerance) {
    std::ostringstream msg;
    msg << where << " sums to " << total;
    throw Error(ErrorCode::kInvalidDistribution, msg.str());
  }
  for (double& p : row) p /= total;
}

std::string cell_name(const char* what, int s, int a, int u) {
  std::ostringstream os;
  os << what << "[" << s << "][" << a << "][" << u << "]";
  return os.str();
}

}  // namespace

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kInvalidDistribution: return "InvalidDistribution";
    case ErrorCode::kInvalidDiscount: return "InvalidDiscount";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kWeightMismatch: return "WeightMismatch";
    case ErrorCode::kAllWeightsZero: return "AllWeightsZero";
    case ErrorCode::kZeroWeight: return "ZeroWeight";
    case ErrorCode::kPolicyShapeMismatch: return "PolicyShapeMismatch";
    case ErrorCode::kDegenerateInput: return "DegenerateInput";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kLogOfNonPositive: return "LogOfNonPositive";
    case ErrorCode::kSingularDenominator: return "SingularDenominator";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kNonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::kModelStepFailure: return "ModelStepFailure";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

MarkovGame make_game(int n_states, int n_pa, int n_aa,
                     std::vector<double> transition, std::vector<double> reward,
                     double gamma) {
  if (n_states <= 0 || n_pa <= 0 || n_aa <= 0) {
    throw Error(ErrorCode::kDimensionMismatch, "counts must be positive");
  }
  const std::size_t cells = static_cast<std::size_t>(n_states) * n_pa * n_aa;
  if (transition.size() != cells * n_states) {
    throw Error(ErrorCode::kDimensionMismatch,
                "transition tensor has " + std::to_string(transition.size()) +
                    " entries, expected " + std::to_string(cells * n_states));
  }
  if (reward.size() != cells) {
    throw Error(ErrorCode::kDimensionMismatch,
                "reward tensor has " + std::to_string(reward.size()) +
                    " entries, expected " + std::to_string(cells));
  }
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw Error(ErrorCode::kInvalidDiscount, "gamma must lie in [0, 1)");
  }
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_pa; ++a) {
      for (int u = 0; u < n_aa; ++u) {
        const std::size_t c = (static_cast<std::size_t>(s) * n_pa + a) * n_aa + u;
        normalize_row(std::span<double>(transition.data() + c * n_states,
                                        static_cast<std::size_t>(n_states)),
                      cell_name("transition", s, a, u));
        if (!std::isfinite(reward[c])) {
          throw Error(ErrorCode::kDegenerateInput,
                      cell_name("reward", s, a, u) + " is not finite");
        }
      }
    }
  }
  MarkovGame g;
  g.n_states_ = n_states;
  g.n_pa_ = n_pa;
  g.n_aa_ = n_aa;
  g.gamma_ = gamma;
  g.transition_ = std::move(transition);
  g.reward_ = std::move(reward);
  return g;
}

void validate(const MarkovGame& game) {
  make_game(game.n_states(), game.n_protagonist_actions(),
            game.n_adversary_actions(), game.flat_transition(),
            game.flat_reward(), game.gamma());
}

MarkovGame two_state_counterexample() {
  // Indices: s1 = 0, s2 = 1; a1 = 0, a2 = 1; u1 = 0, u2 = 1.
  const int n = 2;
  std::vector<double> p(2 * 2 * 2 * 2, 0.0);
  std::vector<double> r(2 * 2 * 2, 0.0);
  auto at = [](int s, int a, int u) { return (s * 2 + a) * 2 + u; };
  // From s1 every pair but (a1, u2) stays put.
  p[at(0, 0, 0) * n + 0] = 1.0;
  r[at(0, 0, 0)] = -3.0;
  p[at(0, 1, 0) * n + 0] = 1.0;
  r[at(0, 1, 0)] = -2.0;
  p[at(0, 1, 1) * n + 0] = 1.0;
  r[at(0, 1, 1)] = -1.0;
  p[at(0, 0, 1) * n + 0] = 1.0 / 3.0;
  p[at(0, 0, 1) * n + 1] = 2.0 / 3.0;
  r[at(0, 0, 1)] = -6.0;
  for (int a = 0; a < 2; ++a) {
    for (int u = 0; u < 2; ++u) p[at(1, a, u) * n + 1] = 1.0;
  }
  return make_game(2, 2, 2, std::move(p), std::move(r), 0.75);
}

TabularPolicy::TabularPolicy(int n_states, int n_actions,
                             std::vector<double> probs)
    : n_states_(n_states), n_actions_(n_actions), probs_(std::move(probs)) {
  if (n_states <= 0 || n_actions <= 0 ||
      probs_.size() != static_cast<std::size_t>(n_states) * n_actions) {
    throw Error(ErrorCode::kPolicyShapeMismatch,
                "policy table does not match its declared shape");
  }
  for (int s = 0; s < n_states; ++s) {
    normalize_row(std::span<double>(probs_.data() +
                                        static_cast<std::size_t>(s) * n_actions,
                                    static_cast<std::size_t>(n_actions)),
                  "policy row " + std::to_string(s));
  }
}

TabularPolicy TabularPolicy::uniform(int n_states, int n_actions) {
  return TabularPolicy(
      n_states, n_actions,
      std::vector<double>(static_cast<std::size_t>(n_states) * n_actions,
                          1.0 / n_actions));
}

TabularPolicy TabularPolicy::deterministic(int n_actions,
                                           const std::vector<int>& actions) {
  const int n_states = static_cast<int>(actions.size());
  std::vector<double> probs(static_cast<std::size_t>(n_states) * n_actions, 0.0);
  for (int s = 0; s < n_states; ++s) {
    if (actions[s] < 0 || actions[s] >= n_actions) {
      throw Error(ErrorCode::kPolicyShapeMismatch, "action index out of range");
    }
    probs[static_cast<std::size_t>(s) * n_actions + actions[s]] = 1.0;
  }
  return TabularPolicy(n_states, n_actions, std::move(probs));
}

TabularPolicy TabularPolicy::from_rows(
    const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) {
    throw Error(ErrorCode::kPolicyShapeMismatch, "policy has no states");
  }
  const int n_actions = static_cast<int>(rows.front().size());
  std::vector<double> probs;
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != n_actions) {
      throw Error(ErrorCode::kPolicyShapeMismatch, "ragged policy rows");
    }
    probs.insert(probs.end(), r.begin(), r.end());
  }
  return TabularPolicy(static_cast<int>(rows.size()), n_actions,
                       std::move(probs));
}

std::vector<double> TabularPolicy::row_max() const {
  std::vector<double> out(static_cast<std::size_t>(n_states_));
  for (int s = 0; s < n_states_; ++s) {
    auto r = row(s);
    out[s] = *std::max_element(r.begin(), r.end());
  }
  return out;
}

double max_abs_diff(std::span<const double> x, std::span<const double> y) {
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

Matrix joint_q_matrix(const MarkovGame& game, const ValueTable& v, int s) {
  if (s < 0 || s >= game.n_states() || v.size() != game.n_states()) {
    throw Error(ErrorCode::kDimensionMismatch, "state or value table size");
  }
  Matrix q(game.n_protagonist_actions(), game.n_adversary_actions());
  for (int a = 0; a < q.rows; ++a) {
    for (int u = 0; u < q.cols; ++u) {
      auto p = game.transition_row(s, a, u);
      double future = 0.0;
      for (int next = 0; next < game.n_states(); ++next) {
        future += p[next] * v.values[next];
      }
      q(a, u) = game.reward(s, a, u) + game.gamma() * future;
    }
  }
  return q;
}

std::string game_to_json(const MarkovGame& game) {
  using nlohmann::json;
  const int ns = game.n_states();
  const int na = game.n_protagonist_actions();
  const int nu = game.n_adversary_actions();
  json trans = json::array();
  json rew = json::array();
  for (int s = 0; s < ns; ++s) {
    json ts = json::array();
    json rs = json::array();
    for (int a = 0; a < na; ++a) {
      json ta = json::array();
      json ra = json::array();
      for (int u = 0; u < nu; ++u) {
        auto row = game.transition_row(s, a, u);
        ta.push_back(std::vector<double>(row.begin(), row.end()));
        ra.push_back(game.reward(s, a, u));
      }
      ts.push_back(std::move(ta));
      rs.push_back(std::move(ra));
    }
    trans.push_back(std::move(ts));
    rew.push_back(std::move(rs));
  }
  json j = {{"n_states", ns},    {"n_pa", na},          {"n_aa", nu},
            {"gamma", game.gamma()}, {"transition", trans}, {"reward", rew}};
  return j.dump(2);
}

MarkovGame game_from_json(const std::string& text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIoError, std::string("game JSON: ") + e.what());
  }
  try {
    const int ns = j.at("n_states").get<int>();
    const int na = j.at("n_pa").get<int>();
    const int nu = j.at("n_aa").get<int>();
    const double gamma = j.at("gamma").get<double>();
    const auto& jt = j.at("transition");
    const auto& jr = j.at("reward");
    auto check = [](const json& node, int n, const char* what) {
      if (!node.is_array() || static_cast<int>(node.size()) != n) {
        throw Error(ErrorCode::kDimensionMismatch,
                    std::string(what) + " nesting does not match counts");
      }
    };
    std::vector<double> p;
    std::vector<double> r;
    check(jt, ns, "transition");
    check(jr, ns, "reward");
    for (int s = 0; s < ns; ++s) {
      check(jt[s], na, "transition");
      check(jr[s], na, "reward");
      for (int a = 0; a < na; ++a) {
        check(jt[s][a], nu, "transition");
        check(jr[s][a], nu, "reward");
        for (int u = 0; u < nu; ++u) {
          check(jt[s][a][u], ns, "transition");
          for (int k = 0; k < ns; ++k) p.push_back(jt[s][a][u][k].get<double>());
          r.push_back(jr[s][a][u].get<double>());
        }
      }
    }
    return make_game(ns, na, nu, std::move(p), std::move(r), gamma);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kDimensionMismatch, std::string("game JSON: ") + e.what());
  }
}

MarkovGame load_game(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return game_from_json(buf.str());
}

}  // namespace mgsmooth
