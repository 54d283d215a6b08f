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


#ifndef MGSMOOTH_SAAC_H_
#define MGSMOOTH_SAAC_H_

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "mgsmooth/game.h"
#include "mgsmooth/nn.h"
#include "mgsmooth/pathtrack.h"

namespace mgsmooth::saac {

enum class Algorithm {
  kSaac,   // WLSE target, u ~ mu
  kSaacU,  // WLSE target, u ~ uniform over the disturbance bounds
  kRarl,   // mean target, u ~ mu
  kAdp,    // mean target, u = 0, no adversary
};

std::string to_string(Algorithm a);        // "saac", "saac-u", "rarl", "adp"
Algorithm algorithm_from_string(const std::string& name);  // kConfigError

struct TrainConfig {
  Algorithm algorithm = Algorithm::kSaac;
  double rho = 5.0;
  int K = 16;
  int M = 1;
  double tau = 0.001;
  int batch_size = 256;
  double gamma = 0.99;
  double policy_lr_hi = 5e-5;
  double policy_lr_lo = 1e-6;
  double value_lr_hi = 8e-5;
  double value_lr_lo = 1e-6;
  long iterations = 5000;
  long eval_interval = 3000;
  int eval_episodes = 5;
  int eval_steps = 150;
  int hidden_layers = 2;
  int hidden_units = 64;
  nn::HiddenActivation activation = nn::HiddenActivation::kGelu;
  // Multiplies the initial output-layer weights of both policy networks;
  // small values start the policies near the action midpoints.
  double policy_init_scale = 1.0;
  // Initial bias of the log-std outputs of both policies.
  double init_logstd = 0.0;
  int replay_capacity = 100000;
  int warmup = 1000;
  int episode_steps = 150;
  int updates_per_episode = 150;
  // A sampling episode ends early once |delta_y| or |delta_phi| exceeds
  // these limits; 0 disables a limit. Evaluation episodes always run in full.
  double sample_max_dy = 0.0;
  double sample_max_dphi = 0.0;
  // Multiplies the stage cost inside the learning targets and objective.
  // Evaluation always reports the unscaled cost.
  double cost_scale = 1.0;
  pathtrack::PathMode path_mode = pathtrack::PathMode::kCurved;
  std::uint64_t seed = 0;
  std::uint64_t eval_seed = 1000;
  // Record wall-clock time per metrics row. Off by default so repeated runs
  // produce identical files.
  bool record_wall_time = false;
};

// The settings used for laptop-scale runs.
TrainConfig desk_preset();

// Throws kConfigError naming the offending field.
void validate(const TrainConfig& cfg);

// Flat key=value text; '#' starts a comment. Keys are TrainConfig field
// names. Throws kConfigError on an unknown key or unparsable value.
void apply_setting(TrainConfig& cfg, const std::string& key, const std::string& value);
TrainConfig parse_config(const std::string& text, TrainConfig base = {});
TrainConfig load_config(const std::string& path, TrainConfig base = {});
std::string config_to_string(const TrainConfig& cfg);

struct Transition {
  pathtrack::VehicleState s;
  pathtrack::Action a;
  double u = 0.0;
  double cost = 0.0;
  pathtrack::VehicleState next;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity);
  void add(const Transition& t);
  int size() const { return static_cast<int>(items_.size()); }
  int capacity() const { return capacity_; }
  // Uniform with replacement over the filled region. Throws kEmptyInput.
  std::vector<Transition> sample(int n, std::mt19937_64& rng) const;
  // Oldest first.
  std::vector<Transition> contents() const;

 private:
  int capacity_;
  int next_ = 0;
  std::vector<Transition> items_;
};

enum class TargetMode { kWlse, kMean };

// (1/rho) log((1/K) sum exp(rho y_k)) with a max shift, or the plain mean.
double aggregate_target(const std::vector<double>& y, double rho, TargetMode mode);

// Draws K samples y_k = draw(rng) and aggregates them.
double estimate_target(const std::function<double(std::mt19937_64&)>& draw,
                       int K, double rho, TargetMode mode, std::mt19937_64& rng);

// The two-state game seen as a sampling model. One draw picks u ~ mu(.|s)
// and returns sum_a pi(a|s) sum_s' p(s'|s,a,u) [r + gamma v(s')]. The
// protagonist action and next state are integrated out inside the draw; only
// the adversary action is sampled, which is the part the smoothing acts on.
double sample_tabular_backup(const MarkovGame& game, const TabularPolicy& pi,
                             const TabularPolicy& mu, const ValueTable& v,
                             int s, std::mt19937_64& rng);

struct Networks {
  nn::MlpParams protagonist;  // obs -> [mean_raw(2), logstd_raw(2)]
  nn::MlpParams adversary;    // obs -> [mean_raw(1), logstd_raw(1)]
  nn::MlpParams value;        // obs -> V
  nn::MlpParams value_target;

  nn::NamedNetworks named() const;
  static Networks from_named(const nn::NamedNetworks& nets);
};

Networks init_networks(const TrainConfig& cfg, std::mt19937_64& rng);

nn::SquashedGaussianHead protagonist_head(const pathtrack::ActionBounds& b);
nn::SquashedGaussianHead adversary_head(const pathtrack::ActionBounds& b);

// Deterministic (noise = 0) actions.
pathtrack::Action mean_action(const nn::MlpParams& protagonist,
                              const pathtrack::VehicleState& s,
                              const pathtrack::EnvConfig& env);
double mean_disturbance(const nn::MlpParams& adversary,
                        const pathtrack::VehicleState& s,
                        const pathtrack::EnvConfig& env);

pathtrack::EnvConfig env_for(const TrainConfig& cfg);

// Target estimation: per state, K draws of (a, u) from the current policies (u
// per the algorithm), one model step each, y = c r + gamma Vbar(s'), then
// the WLSE (or mean) aggregate. Noise comes from rng in a fixed order.
std::vector<double> compute_target_value(const std::vector<pathtrack::VehicleState>& states,
                                         const Networks& nets, const TrainConfig& cfg,
                                         std::mt19937_64& rng);

// One Adam step on 0.5 mean (y - V(s))^2; returns the pre-step loss.
// Throws kNonFiniteLoss.
double value_update(nn::MlpParams& value, nn::AdamState& adam,
                    const std::vector<pathtrack::VehicleState>& states,
                    const std::vector<double>& targets, double lr,
                    pathtrack::PathMode mode);

// J = mean_s [c r(s, a) + gamma V(p(s, a, u))] with reparameterized a and u
// built on the tape; the critic is frozen.
struct PolicyObjective {
  ad::Var value;
  std::vector<ad::Var> protagonist;
  std::vector<ad::Var> adversary;
};
PolicyObjective policy_objective(ad::Tape& tape, const Networks& nets,
                                 const std::vector<pathtrack::VehicleState>& states,
                                 const Matrix& xi, const Matrix& eta,
                                 const TrainConfig& cfg);

struct PolicyStepResult {
  double objective = 0.0;
  bool adversary_stepped = false;
};

// Protagonist descends J; the adversary ascends it when iteration % M == 0
// (never for ADP). Throws kNonFiniteGradient.
PolicyStepResult policy_update(Networks& nets, nn::AdamState& pro_adam,
                               nn::AdamState& adv_adam,
                               const std::vector<pathtrack::VehicleState>& states,
                               const Matrix& xi, const Matrix& eta,
                               const TrainConfig& cfg, long iteration,
                               double lr);

struct EvalResult {
  double tar = 0.0;         // mean over episodes of negated total cost
  double pos_err = 0.0;     // mean |dy|
  double head_err = 0.0;    // mean |dphi|
};

// Deterministic policy, fixed disturbance d each step, episode seeds
// eval_seed, eval_seed + 1, ... Episodes run in parallel; each has its own
// environment and result slot, so the result does not depend on threads.
EvalResult evaluate(const nn::MlpParams& protagonist, const pathtrack::EnvConfig& env,
                    int episodes, int steps, std::uint64_t eval_seed,
                    double disturbance = 0.0);
EvalResult evaluate_serial(const nn::MlpParams& protagonist,
                           const pathtrack::EnvConfig& env, int episodes, int steps,
                           std::uint64_t eval_seed, double disturbance = 0.0);

// lo, lo + step, ..., hi, endpoints included when they fall on the grid.
std::vector<double> disturbance_grid(double lo, double step, double hi);
std::vector<double> default_sweep_grid();  // -0.3 : 0.06 : 0.3

struct SweepRow {
  double disturbance;
  EvalResult result;
};
std::vector<SweepRow> robustness_sweep(const nn::MlpParams& protagonist,
                                       const pathtrack::EnvConfig& env,
                                       const std::vector<double>& grid,
                                       int episodes, int steps,
                                       std::uint64_t eval_seed);
std::string sweep_csv(const std::vector<SweepRow>& rows);

struct MetricsRow {
  long iteration = 0;
  Algorithm algo = Algorithm::kSaac;
  double value_loss = 0.0;  // mean over updates since the previous row
  double policy_objective = 0.0;
  bool has_losses = false;  // false for the initial evaluation
  EvalResult eval;
  double wall_ms = 0.0;
};

std::string metrics_csv(const std::vector<MetricsRow>& rows);

struct TrainResult {
  std::vector<MetricsRow> history;
  Networks final_nets;
  Networks best_nets;
  double best_tar = 0.0;
  std::vector<std::string> warnings;
};

// Alternates sampling episodes with optimizing phases. Deterministic given
// cfg. Rows are emitted at iteration 0, at every eval_interval, and at the
// final iteration.
TrainResult train(const TrainConfig& cfg);

// Fixed-seed finite-difference suite over the primitives, the MLP, the
// squashed head, the dynamics and the model-based policy gradient.
struct GradCheckEntry {
  std::string name;
  double rel_error = 0.0;
  double tolerance = 0.0;
  bool passed() const { return rel_error < tolerance; }
};
std::vector<GradCheckEntry> gradient_suite(std::uint64_t seed = 0);

}  // namespace mgsmooth::saac

#endif  // MGSMOOTH_SAAC_H_
