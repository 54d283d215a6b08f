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


#ifndef MGSMOOTH_PATHTRACK_H_
#define MGSMOOTH_PATHTRACK_H_

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mgsmooth/autodiff.h"

namespace mgsmooth::pathtrack {

struct VehicleParams {
  double k_f = -155495.0;  // N/rad
  double k_r = -155495.0;  // N/rad
  double l_f = 1.19;       // m
  double l_r = 1.46;       // m
  double m = 1520.0;       // kg
  double i_z = 2640.0;     // kg m^2
  double dt = 0.1;         // s
};

// Throws kInvalidArgument if any invariant is violated.
void validate(const VehicleParams& p);

struct VehicleState {
  double p_x = 0.0;
  double delta_y = 0.0;
  double delta_phi = 0.0;
  double v_x = 0.0;
  double v_y = 0.0;
  double omega = 0.0;

  std::array<double, 6> to_array() const {
    return {p_x, delta_y, delta_phi, v_x, v_y, omega};
  }
  static VehicleState from_array(const std::array<double, 6>& s) {
    return {s[0], s[1], s[2], s[3], s[4], s[5]};
  }
  friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

struct Action {
  double delta = 0.0;  // front wheel angle, rad
  double accel = 0.0;  // longitudinal acceleration, m/s^2
};

struct Interval {
  double lo;
  double hi;
  double clamp(double x) const { return x < lo ? lo : (x > hi ? hi : x); }
};

struct ActionBounds {
  Interval delta{-0.4, 0.4};
  Interval accel{-1.5, 3.0};
  Interval dist{-0.5, 0.5};
};

enum class PathMode {
  // Rows 2 and 3 propagate the tracking errors directly. Exact for a
  // straight reference along the x axis.
  kStraight,
  // Rows 1 to 3 move a global pose (x, y, phi); the errors are then taken
  // against the sine reference at the new x.
  kCurved,
};

// y_ref(x) = 7.5 sin(2 pi x/200) + 2.5 sin(2 pi x/300) - 5 sin(2 pi x/400),
// phi_ref = atan(dy_ref/dx). Period 1200 m.
struct Reference {
  double y;
  double phi;
};
Reference reference_lateral(double p_x);

// Single-vehicle step. The disturbance u is added to the lateral velocity
// row. v_x is clamped at 0. Throws kSingularDenominator if either
// denominator of the lateral rows is below 1e-6 in magnitude.
VehicleState dynamics_step(const VehicleState& s, const Action& a, double u,
                           const VehicleParams& p,
                           PathMode mode = PathMode::kCurved);

// Batched step on the tape: every entry is a B x 1 column.
using StateVars = std::array<ad::Var, 6>;
StateVars dynamics_step(const StateVars& s, ad::Var delta, ad::Var accel,
                        ad::Var u, const VehicleParams& p,
                        PathMode mode = PathMode::kCurved);
StateVars state_constant(ad::Tape& tape, const std::vector<VehicleState>& batch);

// Denominators of the v_y and omega rows at speed v_x.
double lateral_denominator(double v_x, const VehicleParams& p);
double yaw_denominator(double v_x, const VehicleParams& p);

// Quadratic tracking cost. It is the quantity the protagonist minimizes and
// the adversary maximizes; evaluation reports its negation.
//   0.03(v_x-20)^2 + 0.8 dy^2 + 30 dphi^2 + 0.05 A^2 + 0.02 omega^2 + 5 delta^2
// The disturbance does not enter directly.
double reward(const VehicleState& s, const Action& a, double u = 0.0);
ad::Var reward(const StateVars& s, ad::Var delta, ad::Var accel);

// Network input features. Tracking errors, speed error, lateral and yaw
// rates, and reference heading changes a few metres ahead.
constexpr int kObsDim = 8;
std::array<double, kObsDim> observe(const VehicleState& s, PathMode mode);
Matrix observe_batch(const std::vector<VehicleState>& batch, PathMode mode);
ad::Var observe(const StateVars& s, PathMode mode);

struct EnvConfig {
  VehicleParams vehicle;
  ActionBounds bounds;
  PathMode mode = PathMode::kCurved;
  int episode_steps = 150;
};

// p_x ~ U[0,1200), dy ~ U[-1,1], dphi ~ U[-0.1,0.1], v_x ~ U[18,22],
// v_y = omega = 0.
VehicleState reset(std::mt19937_64& rng);
VehicleState reset(std::uint64_t seed);

using ProtagonistFn = std::function<Action(const VehicleState&)>;
using AdversaryFn = std::function<double(const VehicleState&)>;

struct Step {
  Action action;
  double dist = 0.0;
  double reward = 0.0;
};

struct Rollout {
  std::vector<VehicleState> states;  // steps + 1 entries
  std::vector<Step> steps;
  double discounted_cost = 0.0;
  double total_cost = 0.0;
  double mean_abs_delta_y = 0.0;    // over the visited states after reset
  double mean_abs_delta_phi = 0.0;
};

// Clamps actions to the bounds before stepping. A null adversary means u = 0.
Rollout rollout(const EnvConfig& env, const ProtagonistFn& protagonist,
                const AdversaryFn& adversary, int steps, std::uint64_t seed,
                double gamma = 1.0);
Rollout rollout_from(const EnvConfig& env, const VehicleState& start,
                     const ProtagonistFn& protagonist,
                     const AdversaryFn& adversary, int steps,
                     double gamma = 1.0);

// CSV with columns step, p_x, delta_y, delta_phi, v_x, v_y, omega, delta,
// accel, dist, reward. Row k holds the state before action k.
std::string trajectory_csv(const Rollout& r);

}  // namespace mgsmooth::pathtrack

#endif  // MGSMOOTH_PATHTRACK_H_
