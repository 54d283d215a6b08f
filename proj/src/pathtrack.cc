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


#include "mgsmooth/pathtrack.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "mgsmooth/error.h"
#include "mgsmooth/format.h"

namespace mgsmooth::pathtrack {
namespace {

constexpr double kMinDenominator = 1e-6;
constexpr double kW1 = 2.0 * std::numbers::pi / 200.0;
constexpr double kW2 = 2.0 * std::numbers::pi / 300.0;
constexpr double kW3 = 2.0 * std::numbers::pi / 400.0;
constexpr double kTargetSpeed = 20.0;
constexpr std::array<double, 3> kPreview = {5.0, 15.0, 30.0};  // m

double sq(double x) { return x * x; }
ad::Var sq(ad::Var x) { return ad::square(x); }

double clamp_nonneg(double x) { return std::max(x, 0.0); }
ad::Var clamp_nonneg(ad::Var x) {
  return ad::clamp(x, 0.0, std::numeric_limits<double>::infinity());
}

void check_denominator(double d, const char* which) {
  if (!(std::abs(d) >= kMinDenominator)) {
    throw Error(ErrorCode::kSingularDenominator,
                std::string(which) + " denominator " + format_sig(d));
  }
}

void check_denominator(const ad::Var& d, const char* which) {
  for (double v : d.value().data) check_denominator(v, which);
}

double zero_like(double) { return 0.0; }
ad::Var zero_like(const ad::Var& x) { return 0.0 * x; }

template <class T>
std::pair<T, T> reference_t(const T& x) {
  using std::atan;
  using std::cos;
  using std::sin;
  T y = 7.5 * sin(kW1 * x) + 2.5 * sin(kW2 * x) - 5.0 * sin(kW3 * x);
  T slope = (7.5 * kW1) * cos(kW1 * x) + (2.5 * kW2) * cos(kW2 * x) -
            (5.0 * kW3) * cos(kW3 * x);
  return {y, atan(slope)};
}

template <class T>
std::array<T, 6> step_t(const std::array<T, 6>& s, const T& delta,
                        const T& accel, const T& u, const VehicleParams& p,
                        PathMode mode) {
  using std::cos;
  using std::sin;
  const T& px = s[0];
  const T& dy = s[1];
  const T& dphi = s[2];
  const T& vx = s[3];
  const T& vy = s[4];
  const T& w = s[5];
  const double dt = p.dt;

  T lat_den = p.m * vx - dt * (p.k_f + p.k_r);
  T yaw_den = dt * (p.l_f * p.l_f * p.k_f + p.l_r * p.l_r * p.k_r) - p.i_z * vx;
  check_denominator(lat_den, "lateral");
  check_denominator(yaw_den, "yaw");

  const double c1 = p.l_f * p.k_f - p.l_r * p.k_r;
  T vy_next =
      (p.m * vx * vy + dt * (c1 * w - p.k_f * delta * vx - p.m * vx * vx * w)) / lat_den + u;
  T w_next = (-p.i_z * w * vx - dt * (c1 * vy - p.l_f * p.k_f * delta * vx)) / yaw_den;
  T vx_next = clamp_nonneg(vx + dt * (accel + vy * w));

  if (mode == PathMode::kStraight) {
    return {px + dt * (vx * cos(dphi) - vy * sin(dphi)),
            dy + dt * (vx * sin(dphi) + vy * cos(dphi)),
            dphi + dt * w,
            vx_next,
            vy_next,
            w_next};
  }
  auto [y_ref, phi_ref] = reference_t(px);
  T y = y_ref + dy;
  T phi = phi_ref + dphi;
  T px_next = px + dt * (vx * cos(phi) - vy * sin(phi));
  T y_next = y + dt * (vx * sin(phi) + vy * cos(phi));
  T phi_next = phi + dt * w;
  auto [y_ref_next, phi_ref_next] = reference_t(px_next);
  return {px_next, y_next - y_ref_next, phi_next - phi_ref_next,
          vx_next, vy_next,             w_next};
}

template <class T>
T cost_t(const std::array<T, 6>& s, const T& delta, const T& accel) {
  return 0.03 * sq(s[3] - kTargetSpeed) + 0.8 * sq(s[1]) + 30.0 * sq(s[2]) +
         0.05 * sq(accel) + 0.02 * sq(s[5]) + 5.0 * sq(delta);
}

template <class T>
std::array<T, kObsDim> observe_t(const std::array<T, 6>& s, PathMode mode) {
  std::array<T, kObsDim> out = {s[1],        5.0 * s[2], 0.5 * (s[3] - kTargetSpeed),
                                s[4],        2.0 * s[5], zero_like(s[0]),
                                zero_like(s[0]), zero_like(s[0])};
  if (mode == PathMode::kCurved) {
    const T phi_here = reference_t(s[0]).second;
    for (std::size_t k = 0; k < kPreview.size(); ++k) {
      out[5 + k] = 5.0 * (reference_t(s[0] + kPreview[k]).second - phi_here);
    }
  }
  return out;
}

}  // namespace

void validate(const VehicleParams& p) {
  if (!(p.m > 0.0 && p.i_z > 0.0 && p.dt > 0.0 && p.l_f > 0.0 && p.l_r > 0.0 &&
        p.k_f < 0.0 && p.k_r < 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "vehicle parameters out of range");
  }
}

Reference reference_lateral(double p_x) {
  auto [y, phi] = reference_t(p_x);
  return {y, phi};
}

double lateral_denominator(double v_x, const VehicleParams& p) {
  return p.m * v_x - p.dt * (p.k_f + p.k_r);
}

double yaw_denominator(double v_x, const VehicleParams& p) {
  return p.dt * (p.l_f * p.l_f * p.k_f + p.l_r * p.l_r * p.k_r) - p.i_z * v_x;
}

VehicleState dynamics_step(const VehicleState& s, const Action& a, double u,
                           const VehicleParams& p, PathMode mode) {
  return VehicleState::from_array(step_t(s.to_array(), a.delta, a.accel, u, p, mode));
}

StateVars dynamics_step(const StateVars& s, ad::Var delta, ad::Var accel,
                        ad::Var u, const VehicleParams& p, PathMode mode) {
  return step_t(s, delta, accel, u, p, mode);
}

StateVars state_constant(ad::Tape& tape, const std::vector<VehicleState>& batch) {
  StateVars out;
  const int n = static_cast<int>(batch.size());
  for (int k = 0; k < 6; ++k) {
    Matrix col(n, 1);
    for (int i = 0; i < n; ++i) {
      col(i, 0) = batch[static_cast<std::size_t>(i)].to_array()[static_cast<std::size_t>(k)];
    }
    out[static_cast<std::size_t>(k)] = tape.constant(std::move(col));
  }
  return out;
}

double reward(const VehicleState& s, const Action& a, double) {
  return cost_t(s.to_array(), a.delta, a.accel);
}

ad::Var reward(const StateVars& s, ad::Var delta, ad::Var accel) {
  return cost_t(s, delta, accel);
}

std::array<double, kObsDim> observe(const VehicleState& s, PathMode mode) {
  return observe_t(s.to_array(), mode);
}

Matrix observe_batch(const std::vector<VehicleState>& batch, PathMode mode) {
  Matrix out(static_cast<int>(batch.size()), kObsDim);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto o = observe(batch[i], mode);
    std::copy(o.begin(), o.end(), out.row(static_cast<int>(i)).begin());
  }
  return out;
}

ad::Var observe(const StateVars& s, PathMode mode) {
  const auto cols = observe_t(s, mode);
  return ad::concat_cols(std::vector<ad::Var>(cols.begin(), cols.end()));
}

VehicleState reset(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> px(0.0, 1200.0);
  std::uniform_real_distribution<double> dy(-1.0, 1.0);
  std::uniform_real_distribution<double> dphi(-0.1, 0.1);
  std::uniform_real_distribution<double> vx(18.0, 22.0);
  VehicleState s;
  s.p_x = px(rng);
  s.delta_y = dy(rng);
  s.delta_phi = dphi(rng);
  s.v_x = vx(rng);
  return s;
}

VehicleState reset(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return reset(rng);
}

Rollout rollout_from(const EnvConfig& env, const VehicleState& start,
                     const ProtagonistFn& protagonist, const AdversaryFn& adversary,
                     int steps, double gamma) {
  if (steps < 1) throw Error(ErrorCode::kInvalidArgument, "steps must be >= 1");
  Rollout r;
  r.states.reserve(static_cast<std::size_t>(steps) + 1);
  r.steps.reserve(static_cast<std::size_t>(steps));
  r.states.push_back(start);
  double discount = 1.0;
  for (int k = 0; k < steps; ++k) {
    const VehicleState& s = r.states.back();
    Action a = protagonist(s);
    a.delta = env.bounds.delta.clamp(a.delta);
    a.accel = env.bounds.accel.clamp(a.accel);
    const double u = adversary ? env.bounds.dist.clamp(adversary(s)) : 0.0;
    const double c = reward(s, a, u);
    r.steps.push_back({a, u, c});
    r.total_cost += c;
    r.discounted_cost += discount * c;
    discount *= gamma;
    r.states.push_back(dynamics_step(s, a, u, env.vehicle, env.mode));
  }
  for (std::size_t k = 1; k < r.states.size(); ++k) {
    r.mean_abs_delta_y += std::abs(r.states[k].delta_y);
    r.mean_abs_delta_phi += std::abs(r.states[k].delta_phi);
  }
  r.mean_abs_delta_y /= steps;
  r.mean_abs_delta_phi /= steps;
  return r;
}

Rollout rollout(const EnvConfig& env, const ProtagonistFn& protagonist,
                const AdversaryFn& adversary, int steps, std::uint64_t seed,
                double gamma) {
  return rollout_from(env, reset(seed), protagonist, adversary, steps, gamma);
}

std::string trajectory_csv(const Rollout& r) {
  std::ostringstream out;
  out << "step,p_x,delta_y,delta_phi,v_x,v_y,omega,delta,accel,dist,reward\n";
  for (std::size_t k = 0; k < r.states.size(); ++k) {
    const VehicleState& s = r.states[k];
    out << k << ',' << format_sig(s.p_x) << ',' << format_sig(s.delta_y) << ','
        << format_sig(s.delta_phi) << ',' << format_sig(s.v_x) << ','
        << format_sig(s.v_y) << ',' << format_sig(s.omega);
    if (k < r.steps.size()) {
      const Step& st = r.steps[k];
      out << ',' << format_sig(st.action.delta) << ',' << format_sig(st.action.accel)
          << ',' << format_sig(st.dist) << ',' << format_sig(st.reward);
    } else {
      out << ",,,,";
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace mgsmooth::pathtrack
