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


// Serial reference kernels against their OpenMP counterparts. The pairs
// produce bitwise-identical results; only the wall time should differ.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "mgsmooth/autodiff.h"
#include "mgsmooth/bellman.h"
#include "mgsmooth/game.h"
#include "mgsmooth/saac.h"

namespace {

using namespace mgsmooth;

std::vector<double> simplex(std::mt19937_64& rng, int n) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> p(static_cast<std::size_t>(n));
  double total = 0.0;
  for (double& x : p) total += (x = e(rng));
  for (double& x : p) x /= total;
  return p;
}

MarkovGame random_game(int ns, int na, int nu) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> reward(-5.0, 5.0);
  std::vector<double> p;
  std::vector<double> r;
  for (int c = 0; c < ns * na * nu; ++c) {
    auto row = simplex(rng, ns);
    p.insert(p.end(), row.begin(), row.end());
    r.push_back(reward(rng));
  }
  return make_game(ns, na, nu, std::move(p), std::move(r), 0.9);
}

TabularPolicy random_policy(int ns, int na, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> probs;
  for (int s = 0; s < ns; ++s) {
    auto row = simplex(rng, na);
    probs.insert(probs.end(), row.begin(), row.end());
  }
  return TabularPolicy(ns, na, std::move(probs));
}

struct BellmanCase {
  MarkovGame game;
  BellmanOperator op;
  ValueTable v;

  explicit BellmanCase(int ns)
      : game(random_game(ns, 6, 6)),
        op(BellmanOperator::smoothed(game, random_policy(ns, 6, 1), random_policy(ns, 6, 2),
                                     {5.0, WeightMode::kAdversary})),
        v(ValueTable::zeros(ns)) {}
};

void BM_WlseBackupSerial(benchmark::State& state) {
  BellmanCase c(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(c.op.apply_serial(c.v));
}
void BM_WlseBackupParallel(benchmark::State& state) {
  BellmanCase c(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(c.op.apply(c.v));
}
BENCHMARK(BM_WlseBackupSerial)->Arg(64)->Arg(192);
BENCHMARK(BM_WlseBackupParallel)->Arg(64)->Arg(192);

Matrix random_matrix(int r, int c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(r, c);
  for (double& x : m.data) x = n(rng);
  return m;
}

void BM_MatmulSerial(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Matrix a = random_matrix(n, 64, 1);
  const Matrix b = random_matrix(64, 64, 2);
  for (auto _ : state) benchmark::DoNotOptimize(ad::matmul_values_serial(a, b));
}
void BM_MatmulParallel(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Matrix a = random_matrix(n, 64, 1);
  const Matrix b = random_matrix(64, 64, 2);
  for (auto _ : state) benchmark::DoNotOptimize(ad::matmul_values(a, b));
}
BENCHMARK(BM_MatmulSerial)->Arg(256)->Arg(1024);
BENCHMARK(BM_MatmulParallel)->Arg(256)->Arg(1024);

struct EvalCase {
  saac::TrainConfig cfg = saac::desk_preset();
  saac::Networks nets;
  EvalCase() {
    std::mt19937_64 rng(0);
    nets = saac::init_networks(cfg, rng);
  }
};

void BM_EvaluateSerial(benchmark::State& state) {
  EvalCase c;
  const auto env = saac::env_for(c.cfg);
  for (auto _ : state) {
    benchmark::DoNotOptimize(saac::evaluate_serial(c.nets.protagonist, env, 8, 150, 1000));
  }
}
void BM_EvaluateParallel(benchmark::State& state) {
  EvalCase c;
  const auto env = saac::env_for(c.cfg);
  for (auto _ : state) {
    benchmark::DoNotOptimize(saac::evaluate(c.nets.protagonist, env, 8, 150, 1000));
  }
}
BENCHMARK(BM_EvaluateSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EvaluateParallel)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
