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

#ifndef MGSMOOTH_TESTS_TEST_UTIL_H_
#define MGSMOOTH_TESTS_TEST_UTIL_H_

#include <random>
#include <vector>

#include "mgsmooth/game.h"

namespace mgsmooth::testing {

inline std::vector<double> random_simplex(std::mt19937_64& rng, int n) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> p(static_cast<std::size_t>(n));
  double total = 0.0;
  for (double& x : p) total += (x = e(rng));
  for (double& x : p) x /= total;
  return p;
}

inline MarkovGame random_game(std::mt19937_64& rng, int ns, int na, int nu,
                              double gamma) {
  std::uniform_real_distribution<double> reward(-5.0, 5.0);
  std::vector<double> p;
  std::vector<double> r;
  for (int c = 0; c < ns * na * nu; ++c) {
    auto row = random_simplex(rng, ns);
    p.insert(p.end(), row.begin(), row.end());
    r.push_back(reward(rng));
  }
  return make_game(ns, na, nu, std::move(p), std::move(r), gamma);
}

inline MarkovGame random_game(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> states(1, 5);
  std::uniform_int_distribution<int> actions(1, 4);
  std::uniform_real_distribution<double> gamma(0.0, 0.95);
  const int ns = states(rng);
  const int na = actions(rng);
  const int nu = actions(rng);
  return random_game(rng, ns, na, nu, gamma(rng));
}

inline TabularPolicy random_policy(std::mt19937_64& rng, int ns, int na) {
  std::vector<double> p;
  for (int s = 0; s < ns; ++s) {
    auto row = random_simplex(rng, na);
    p.insert(p.end(), row.begin(), row.end());
  }
  return TabularPolicy(ns, na, std::move(p));
}

inline ValueTable random_values(std::mt19937_64& rng, int ns, double scale = 10.0) {
  std::uniform_real_distribution<double> d(-scale, scale);
  ValueTable v = ValueTable::zeros(ns);
  for (double& x : v.values) x = d(rng);
  return v;
}

// pi_0 and mu_0 of the two-state experiments. s2 is absorbing, so its rows
// only matter to the error bounds; they repeat the s1 rows.
inline TabularPolicy table_pi0() {
  return TabularPolicy::from_rows({{0.5, 0.5}, {0.5, 0.5}});
}
inline TabularPolicy table_mu0() {
  return TabularPolicy::from_rows({{0.45, 0.55}, {0.45, 0.55}});
}

}  // namespace mgsmooth::testing

#endif  // MGSMOOTH_TESTS_TEST_UTIL_H_
