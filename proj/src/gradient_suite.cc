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


#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <utility>

#include "mgsmooth/saac.h"

namespace mgsmooth::saac {
namespace {

using ad::Tape;
using ad::Var;

constexpr double kPrimitiveTol = 1e-5;
constexpr double kCompositeTol = 1e-4;
constexpr int kPrimitiveTrials = 20;

Matrix uniform_matrix(std::mt19937_64& rng, int r, int c, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  Matrix m(r, c);
  for (double& v : m.data) v = d(rng);
  return m;
}

std::vector<pathtrack::VehicleState> random_states(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> px(0, 1200), err(-1, 1), dphi(-0.2, 0.2),
      vx(5, 25), vy(-0.5, 0.5), w(-0.3, 0.3);
  std::vector<pathtrack::VehicleState> out;
  for (int i = 0; i < n; ++i) out.push_back({px(rng), err(rng), dphi(rng), vx(rng), vy(rng), w(rng)});
  return out;
}

}  // namespace

std::vector<GradCheckEntry> gradient_suite(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<GradCheckEntry> out;
  auto record = [&](std::string name, double err, double tol) {
    out.push_back({std::move(name), err, tol});
  };

  // Primitives: weighted sum of the op output against a random weight.
  using Unary = std::function<Var(Var)>;
  const std::vector<std::tuple<std::string, Unary, double, double>> unary = {
      {"exp", [](Var x) { return ad::exp(x); }, -2, 2},
      {"log", [](Var x) { return ad::log(x); }, 0.2, 3},
      {"tanh", [](Var x) { return ad::tanh(x); }, -3, 3},
      {"gelu", [](Var x) { return ad::gelu(x); }, -4, 4},
      {"square", [](Var x) { return ad::square(x); }, -3, 3},
      {"sin", [](Var x) { return ad::sin(x); }, -4, 4},
      {"cos", [](Var x) { return ad::cos(x); }, -4, 4},
      {"atan", [](Var x) { return ad::atan(x); }, -4, 4},
      {"affine", [](Var x) { return ad::affine(x, {1.5}, {-0.25}); }, -2, 2},
      {"sum", [](Var x) { return ad::sum(x); }, -2, 2},
      {"mean", [](Var x) { return ad::mean(x); }, -2, 2},
      {"row_sum", [](Var x) { return ad::row_sum(x); }, -2, 2},
      // Inputs lie strictly inside the clamp range so no sample sits on a kink.
      {"clamp", [](Var x) { return ad::clamp(x, -5.0, 5.0); }, -4, 4},
  };
  std::uniform_int_distribution<int> dim(1, 4);
  for (const auto& [name, op, lo, hi] : unary) {
    double worst = 0.0;
    for (int t = 0; t < kPrimitiveTrials; ++t) {
      const Matrix x = uniform_matrix(rng, dim(rng), dim(rng), lo, hi);
      Tape probe;
      const Var shape = op(probe.constant(x));
      const Matrix w = uniform_matrix(rng, shape.rows(), shape.cols(), -1, 1);
      auto f = [&](Tape& tape, const std::vector<Var>& in) {
        return ad::sum(op(in[0]) * tape.constant(w));
      };
      worst = std::max(worst, nn::check_gradient(f, {x}).max_rel_error);
    }
    record("primitive/" + name, worst, kPrimitiveTol);
  }

  using Binary = std::function<Var(Var, Var)>;
  const std::vector<std::pair<std::string, Binary>> binary = {
      {"add", [](Var a, Var b) { return a + b; }},
      {"sub", [](Var a, Var b) { return a - b; }},
      {"mul", [](Var a, Var b) { return a * b; }},
      {"div", [](Var a, Var b) { return a / b; }},
  };
  for (const auto& [name, op] : binary) {
    double worst = 0.0;
    for (int t = 0; t < kPrimitiveTrials; ++t) {
      const int r = dim(rng), c = dim(rng);
      const Matrix a = uniform_matrix(rng, r, c, -2, 2);
      // Alternate full, row-broadcast and column-broadcast right operands.
      const Matrix b = uniform_matrix(rng, t % 3 == 1 ? 1 : r, t % 3 == 2 ? 1 : c, 0.5, 2);
      const Matrix w = uniform_matrix(rng, r, c, -1, 1);
      auto f = [&](Tape& tape, const std::vector<Var>& in) {
        return ad::sum(op(in[0], in[1]) * tape.constant(w));
      };
      worst = std::max(worst, nn::check_gradient(f, {a, b}).max_rel_error);
    }
    record("primitive/" + name, worst, kPrimitiveTol);
  }

  {
    double worst = 0.0;
    for (int t = 0; t < kPrimitiveTrials; ++t) {
      const int n = dim(rng), k = dim(rng), m = dim(rng) + 1;
      const Matrix a = uniform_matrix(rng, n, k, -1, 1);
      const Matrix b = uniform_matrix(rng, k, m, -1, 1);
      const Matrix w = uniform_matrix(rng, n, m + 1, -1, 1);
      auto f = [&](Tape& tape, const std::vector<Var>& in) {
        const Var c = ad::matmul(in[0], in[1]);
        return ad::sum(ad::concat_cols({ad::slice_cols(c, 1, m - 1), ad::slice_cols(c, 0, 2)}) *
                       tape.constant(w));
      };
      worst = std::max(worst, nn::check_gradient(f, {a, b}).max_rel_error);
    }
    record("primitive/matmul_slice_concat", worst, kPrimitiveTol);
  }

  // MLP parameters and input.
  {
    double worst = 0.0;
    for (auto act : {nn::HiddenActivation::kGelu, nn::HiddenActivation::kTanh}) {
      nn::MlpParams p = nn::make_mlp({2, 8, 1}, act, nn::OutputActivation::kLinear, rng);
      for (Matrix& b : p.biases) b = uniform_matrix(rng, b.rows, b.cols, -0.5, 0.5);
      std::vector<Matrix> inputs;
      for (const Matrix* t : std::as_const(p).tensors()) inputs.push_back(*t);
      inputs.push_back(uniform_matrix(rng, 5, 2, -2, 2));
      auto f = [&](Tape&, const std::vector<Var>& in) {
        return ad::sum(nn::mlp_forward(p, std::vector<Var>(in.begin(), in.end() - 1), in.back()));
      };
      worst = std::max(worst, nn::check_gradient(f, inputs).max_rel_error);
    }
    record("mlp", worst, kCompositeTol);
  }

  // Squashed Gaussian head.
  {
    double worst = 0.0;
    const nn::SquashedGaussianHead head{{-0.4, -1.5}, {0.4, 3.0}};
    for (int t = 0; t < 10; ++t) {
      const Matrix noise = uniform_matrix(rng, 3, 2, -2, 2);
      auto f = [&](Tape& tape, const std::vector<Var>& in) {
        return ad::sum(ad::square(nn::sample_squashed(head, in[0], in[1], tape.constant(noise))));
      };
      worst = std::max(worst, nn::check_gradient(f, {uniform_matrix(rng, 3, 2, -1.5, 1.5),
                                                     uniform_matrix(rng, 3, 2, -3, 1.5)})
                                  .max_rel_error);
    }
    record("squashed_head", worst, kCompositeTol);
  }

  // Dynamics: every output against every state and action input.
  for (auto mode : {pathtrack::PathMode::kStraight, pathtrack::PathMode::kCurved}) {
    double worst = 0.0;
    for (const auto& s : random_states(rng, 20)) {
      std::vector<Matrix> inputs;
      for (double v : s.to_array()) inputs.emplace_back(1, 1, v);
      inputs.emplace_back(1, 1, std::uniform_real_distribution<>(-0.4, 0.4)(rng));
      inputs.emplace_back(1, 1, std::uniform_real_distribution<>(-1.5, 3.0)(rng));
      inputs.emplace_back(1, 1, std::uniform_real_distribution<>(-0.5, 0.5)(rng));
      for (int k = 0; k < 6; ++k) {
        auto f = [&](Tape&, const std::vector<Var>& in) {
          const pathtrack::StateVars sv = {in[0], in[1], in[2], in[3], in[4], in[5]};
          return ad::sum(pathtrack::dynamics_step(sv, in[6], in[7], in[8],
                                                  pathtrack::VehicleParams{}, mode)[k]);
        };
        worst = std::max(worst, nn::check_gradient(f, inputs, 1e-3, nn::FdStencil::kFivePoint)
                                    .max_rel_error);
      }
    }
    record(mode == pathtrack::PathMode::kCurved ? "dynamics/curved" : "dynamics/straight", worst,
           kPrimitiveTol);
  }

  // Model-based policy gradient: dJ/da and dJ/du of r + gamma V(p(s, a, u)),
  // then through the policy networks.
  {
    TrainConfig cfg;
    cfg.hidden_units = 16;
    std::mt19937_64 init(seed + 1);
    const Networks nets = init_networks(cfg, init);
    const auto states = random_states(rng, 3);
    const pathtrack::EnvConfig env = env_for(cfg);

    auto action_fn = [&](Tape& tape, const std::vector<Var>& in) {
      const pathtrack::StateVars s = pathtrack::state_constant(tape, states);
      const Var delta = in[0], accel = in[1], u = in[2];
      const auto next = pathtrack::dynamics_step(s, delta, accel, u, env.vehicle, env.mode);
      const auto critic = nn::bind(tape, nets.value, false);
      const Var v = nn::mlp_forward(nets.value, critic, pathtrack::observe(next, env.mode));
      return ad::mean(pathtrack::reward(s, delta, accel) + cfg.gamma * v);
    };
    const auto r = nn::check_gradient(
        action_fn,
        {uniform_matrix(rng, 3, 1, -0.3, 0.3), uniform_matrix(rng, 3, 1, -1, 2),
         uniform_matrix(rng, 3, 1, -0.4, 0.4)},
        1e-4, nn::FdStencil::kFivePoint);
    record("policy_gradient/dJ_da", std::max(r.rel_errors[0], r.rel_errors[1]), kCompositeTol);
    record("policy_gradient/dJ_du", r.rel_errors[2], kCompositeTol);

    const Matrix xi = uniform_matrix(rng, 3, 2, -1, 1);
    const Matrix eta = uniform_matrix(rng, 3, 1, -1, 1);
    const std::size_t n_pro = nets.protagonist.tensors().size();
    std::vector<Matrix> inputs;
    for (const Matrix* t : nets.protagonist.tensors()) inputs.push_back(*t);
    for (const Matrix* t : nets.adversary.tensors()) inputs.push_back(*t);
    auto param_fn = [&](Tape& tape, const std::vector<Var>& in) {
      const pathtrack::StateVars s = pathtrack::state_constant(tape, states);
      const Var obs = tape.constant(pathtrack::observe_batch(states, env.mode));
      const std::vector<Var> pro(in.begin(), in.begin() + static_cast<long>(n_pro));
      const std::vector<Var> adv(in.begin() + static_cast<long>(n_pro), in.end());
      const Var po = nn::mlp_forward(nets.protagonist, pro, obs);
      const Var a = nn::sample_squashed(protagonist_head(env.bounds), ad::slice_cols(po, 0, 2),
                                        ad::slice_cols(po, 2, 2), tape.constant(xi));
      const Var ao = nn::mlp_forward(nets.adversary, adv, obs);
      const Var u = nn::sample_squashed(adversary_head(env.bounds), ad::slice_cols(ao, 0, 1),
                                        ad::slice_cols(ao, 1, 1), tape.constant(eta));
      const Var delta = ad::slice_cols(a, 0, 1), accel = ad::slice_cols(a, 1, 1);
      const auto next = pathtrack::dynamics_step(s, delta, accel, u, env.vehicle, env.mode);
      const auto critic = nn::bind(tape, nets.value, false);
      const Var v = nn::mlp_forward(nets.value, critic, pathtrack::observe(next, env.mode));
      return ad::mean(pathtrack::reward(s, delta, accel) + cfg.gamma * v);
    };
    const auto p = nn::check_gradient(param_fn, inputs, 1e-4, nn::FdStencil::kFivePoint);
    double pro_err = 0.0, adv_err = 0.0;
    for (std::size_t i = 0; i < p.rel_errors.size(); ++i) {
      (i < n_pro ? pro_err : adv_err) = std::max(i < n_pro ? pro_err : adv_err, p.rel_errors[i]);
    }
    record("policy_gradient/protagonist_params", pro_err, kCompositeTol);
    record("policy_gradient/adversary_params", adv_err, kCompositeTol);

    // Same composite through the library's objective builder.
    Tape tape;
    const PolicyObjective j = policy_objective(tape, nets, states, xi, eta, cfg);
    tape.backward(j.value);
    const auto lib = nn::gradients(j.protagonist);
    Tape tape2;
    std::vector<Var> vars;
    for (const Matrix& m : inputs) vars.push_back(tape2.variable(m));
    tape2.backward(param_fn(tape2, vars));
    double diff = 0.0;
    for (std::size_t i = 0; i < lib.size(); ++i) {
      diff = std::max(diff, nn::relative_error(lib[i], vars[i].grad()));
    }
    record("policy_gradient/objective_builder", diff, kCompositeTol);
  }

  // Value regression loss.
  {
    TrainConfig cfg;
    cfg.hidden_units = 16;
    std::mt19937_64 init(seed + 2);
    const Networks nets = init_networks(cfg, init);
    const auto states = random_states(rng, 4);
    const Matrix obs = pathtrack::observe_batch(states, cfg.path_mode);
    const Matrix y = uniform_matrix(rng, 4, 1, -5, 5);
    std::vector<Matrix> inputs;
    for (const Matrix* t : nets.value.tensors()) inputs.push_back(*t);
    auto f = [&](Tape& tape, const std::vector<Var>& in) {
      const Var v = nn::mlp_forward(nets.value, in, tape.constant(obs));
      return 0.5 * ad::mean(ad::square(v - tape.constant(y)));
    };
    record("value_loss", nn::check_gradient(f, inputs).max_rel_error, kCompositeTol);
  }
  return out;
}

}  // namespace mgsmooth::saac
