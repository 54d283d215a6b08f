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


#include "mgsmooth/saac.h"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "mgsmooth/error.h"
#include "mgsmooth/format.h"

namespace mgsmooth::saac {
namespace {

using pathtrack::Action;
using pathtrack::VehicleState;

std::string full_precision(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw Error(ErrorCode::kConfigError, "bad number for " + key + ": '" + v + "'");
  }
  return out;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& v) {
  Int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw Error(ErrorCode::kConfigError, "bad integer for " + key + ": '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw Error(ErrorCode::kConfigError, "bad boolean for " + key + ": '" + v + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Field {
  const char* name;
  std::function<void(TrainConfig&, const std::string&)> set;
  std::function<std::string(const TrainConfig&)> get;
};

#define MG_DOUBLE_FIELD(f)                                                     \
  Field {                                                                      \
    #f, [](TrainConfig& c, const std::string& v) { c.f = parse_double(#f, v); }, \
        [](const TrainConfig& c) { return full_precision(c.f); }               \
  }
#define MG_INT_FIELD(f, T)                                                     \
  Field {                                                                      \
    #f, [](TrainConfig& c, const std::string& v) { c.f = parse_int<T>(#f, v); }, \
        [](const TrainConfig& c) { return std::to_string(c.f); }               \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"algorithm",
       [](TrainConfig& c, const std::string& v) { c.algorithm = algorithm_from_string(v); },
       [](const TrainConfig& c) { return to_string(c.algorithm); }},
      MG_DOUBLE_FIELD(rho),
      MG_INT_FIELD(K, int),
      MG_INT_FIELD(M, int),
      MG_DOUBLE_FIELD(tau),
      MG_INT_FIELD(batch_size, int),
      MG_DOUBLE_FIELD(gamma),
      MG_DOUBLE_FIELD(policy_lr_hi),
      MG_DOUBLE_FIELD(policy_lr_lo),
      MG_DOUBLE_FIELD(value_lr_hi),
      MG_DOUBLE_FIELD(value_lr_lo),
      MG_INT_FIELD(iterations, long),
      MG_INT_FIELD(eval_interval, long),
      MG_INT_FIELD(eval_episodes, int),
      MG_INT_FIELD(eval_steps, int),
      MG_INT_FIELD(hidden_layers, int),
      MG_INT_FIELD(hidden_units, int),
      MG_DOUBLE_FIELD(policy_init_scale),
      MG_DOUBLE_FIELD(init_logstd),
      MG_DOUBLE_FIELD(sample_max_dy),
      MG_DOUBLE_FIELD(sample_max_dphi),
      {"activation",
       [](TrainConfig& c, const std::string& v) {
         if (v == "gelu") {
           c.activation = nn::HiddenActivation::kGelu;
         } else if (v == "tanh") {
           c.activation = nn::HiddenActivation::kTanh;
         } else {
           throw Error(ErrorCode::kConfigError, "activation must be gelu or tanh");
         }
       },
       [](const TrainConfig& c) {
         return std::string(c.activation == nn::HiddenActivation::kGelu ? "gelu" : "tanh");
       }},
      MG_INT_FIELD(replay_capacity, int),
      MG_INT_FIELD(warmup, int),
      MG_INT_FIELD(episode_steps, int),
      MG_INT_FIELD(updates_per_episode, int),
      MG_DOUBLE_FIELD(cost_scale),
      {"path_mode",
       [](TrainConfig& c, const std::string& v) {
         if (v == "curved") {
           c.path_mode = pathtrack::PathMode::kCurved;
         } else if (v == "straight") {
           c.path_mode = pathtrack::PathMode::kStraight;
         } else {
           throw Error(ErrorCode::kConfigError, "path_mode must be curved or straight");
         }
       },
       [](const TrainConfig& c) {
         return std::string(c.path_mode == pathtrack::PathMode::kCurved ? "curved"
                                                                        : "straight");
       }},
      MG_INT_FIELD(seed, std::uint64_t),
      MG_INT_FIELD(eval_seed, std::uint64_t),
      {"record_wall_time",
       [](TrainConfig& c, const std::string& v) {
         c.record_wall_time = parse_bool("record_wall_time", v);
       },
       [](const TrainConfig& c) { return std::string(c.record_wall_time ? "true" : "false"); }},
  };
  return table;
}

#undef MG_DOUBLE_FIELD
#undef MG_INT_FIELD

// Independent deterministic streams derived from one seed.
std::mt19937_64 stream(std::uint64_t seed, std::uint64_t which) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(which)};
  return std::mt19937_64(seq);
}

Matrix normal_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (double& v : m.data) v = n(rng);
  return m;
}

Matrix obs_row(const VehicleState& s, pathtrack::PathMode mode) {
  const auto o = pathtrack::observe(s, mode);
  return Matrix(1, pathtrack::kObsDim, std::vector<double>(o.begin(), o.end()));
}

// Splits a policy output row block into mean and log-std halves.
std::pair<Matrix, Matrix> split_head(const Matrix& out, int dim) {
  Matrix mean(out.rows, dim), logstd(out.rows, dim);
  for (int i = 0; i < out.rows; ++i) {
    for (int j = 0; j < dim; ++j) {
      mean(i, j) = out(i, j);
      logstd(i, j) = out(i, dim + j);
    }
  }
  return {mean, logstd};
}

VehicleState model_step(const VehicleState& s, const Action& a, double u,
                        const pathtrack::EnvConfig& env) {
  try {
    return pathtrack::dynamics_step(s, a, u, env.vehicle, env.mode);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kSingularDenominator) throw;
    throw Error(ErrorCode::kModelStepFailure, e.what());
  }
}

void check_finite(const std::vector<Matrix>& grads, const char* what) {
  for (const Matrix& g : grads) {
    for (double v : g.data) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::kNonFiniteGradient, std::string("non-finite gradient in ") + what);
      }
    }
  }
}

EvalResult run_episode(const nn::MlpParams& protagonist, const pathtrack::EnvConfig& env,
                       int steps, std::uint64_t seed, double disturbance) {
  auto policy = [&](const VehicleState& s) { return mean_action(protagonist, s, env); };
  pathtrack::AdversaryFn adv;
  if (disturbance != 0.0) adv = [disturbance](const VehicleState&) { return disturbance; };
  const pathtrack::Rollout r = pathtrack::rollout(env, policy, adv, steps, seed);
  return {-r.total_cost, r.mean_abs_delta_y, r.mean_abs_delta_phi};
}

EvalResult average(const std::vector<EvalResult>& parts) {
  EvalResult out;
  for (const EvalResult& p : parts) {
    out.tar += p.tar;
    out.pos_err += p.pos_err;
    out.head_err += p.head_err;
  }
  const double n = static_cast<double>(parts.size());
  out.tar /= n;
  out.pos_err /= n;
  out.head_err /= n;
  return out;
}

}  // namespace

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kSaac: return "saac";
    case Algorithm::kSaacU: return "saac-u";
    case Algorithm::kRarl: return "rarl";
    case Algorithm::kAdp: return "adp";
  }
  return "?";
}

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "saac") return Algorithm::kSaac;
  if (name == "saac-u") return Algorithm::kSaacU;
  if (name == "rarl") return Algorithm::kRarl;
  if (name == "adp") return Algorithm::kAdp;
  throw Error(ErrorCode::kConfigError, "unknown algorithm '" + name + "'");
}

namespace {

bool outside_corridor(const VehicleState& s, const TrainConfig& cfg) {
  return (cfg.sample_max_dy > 0.0 && std::abs(s.delta_y) > cfg.sample_max_dy) ||
         (cfg.sample_max_dphi > 0.0 && std::abs(s.delta_phi) > cfg.sample_max_dphi);
}

}  // namespace

TrainConfig desk_preset() {
  TrainConfig c;
  c.batch_size = 64;
  c.iterations = 5000;
  c.eval_interval = 500;
  c.policy_lr_hi = 3e-4;
  c.policy_lr_lo = 1e-5;
  c.value_lr_hi = 1e-3;
  c.value_lr_lo = 1e-5;
  c.tau = 0.005;
  c.warmup = 600;
  c.gamma = 0.95;
  c.policy_init_scale = 0.01;
  c.init_logstd = -1.0;
  c.sample_max_dy = 5.0;
  c.sample_max_dphi = 1.0;
  return c;
}

void validate(const TrainConfig& c) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::kConfigError, what);
  };
  require(c.rho > 0.0, "rho must be > 0");
  require(c.K >= 1, "K must be >= 1");
  require(c.M >= 1, "M must be >= 1");
  require(c.tau > 0.0 && c.tau <= 1.0, "tau must be in (0, 1]");
  require(c.batch_size >= 1, "batch_size must be >= 1");
  require(c.gamma >= 0.0 && c.gamma < 1.0, "gamma must be in [0, 1)");
  require(c.policy_lr_hi >= 0.0 && c.policy_lr_lo >= 0.0, "policy learning rates must be >= 0");
  require(c.value_lr_hi >= 0.0 && c.value_lr_lo >= 0.0, "value learning rates must be >= 0");
  require(c.iterations >= 0, "iterations must be >= 0");
  require(c.eval_interval >= 1, "eval_interval must be >= 1");
  require(c.eval_episodes >= 1, "eval_episodes must be >= 1");
  require(c.eval_steps >= 1, "eval_steps must be >= 1");
  require(c.hidden_layers >= 1, "hidden_layers must be >= 1");
  require(c.hidden_units >= 1, "hidden_units must be >= 1");
  require(c.replay_capacity >= 1, "replay_capacity must be >= 1");
  require(c.warmup >= 0, "warmup must be >= 0");
  require(c.episode_steps >= 1, "episode_steps must be >= 1");
  require(c.updates_per_episode >= 1, "updates_per_episode must be >= 1");
  require(c.cost_scale > 0.0, "cost_scale must be > 0");
  require(c.policy_init_scale >= 0.0, "policy_init_scale must be >= 0");
  require(c.sample_max_dy >= 0.0, "sample_max_dy must be >= 0");
  require(c.sample_max_dphi >= 0.0, "sample_max_dphi must be >= 0");
}

void apply_setting(TrainConfig& cfg, const std::string& key, const std::string& value) {
  for (const Field& f : fields()) {
    if (key == f.name) {
      f.set(cfg, value);
      return;
    }
  }
  throw Error(ErrorCode::kConfigError, "unknown config key '" + key + "'");
}

TrainConfig parse_config(const std::string& text, TrainConfig base) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kConfigError, "line " + std::to_string(lineno) + ": expected key=value");
    }
    apply_setting(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

TrainConfig load_config(const std::string& path, TrainConfig base) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::kConfigError, "cannot read config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::string config_to_string(const TrainConfig& cfg) {
  std::string out;
  for (const Field& f : fields()) out += std::string(f.name) + "=" + f.get(cfg) + "\n";
  return out;
}

ReplayBuffer::ReplayBuffer(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw Error(ErrorCode::kInvalidArgument, "capacity must be >= 1");
  items_.reserve(static_cast<std::size_t>(std::min(capacity, 1 << 16)));
}

void ReplayBuffer::add(const Transition& t) {
  if (size() < capacity_) {
    items_.push_back(t);
  } else {
    items_[static_cast<std::size_t>(next_)] = t;
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<Transition> ReplayBuffer::sample(int n, std::mt19937_64& rng) const {
  if (items_.empty()) throw Error(ErrorCode::kEmptyInput, "sampling an empty buffer");
  std::uniform_int_distribution<int> pick(0, size() - 1);
  std::vector<Transition> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(items_[static_cast<std::size_t>(pick(rng))]);
  return out;
}

std::vector<Transition> ReplayBuffer::contents() const {
  if (size() < capacity_) return items_;
  std::vector<Transition> out;
  for (int i = 0; i < capacity_; ++i) {
    out.push_back(items_[static_cast<std::size_t>((next_ + i) % capacity_)]);
  }
  return out;
}

double aggregate_target(const std::vector<double>& y, double rho, TargetMode mode) {
  if (y.empty()) throw Error(ErrorCode::kEmptyInput, "no samples");
  if (mode == TargetMode::kMean) {
    double s = 0.0;
    for (double v : y) s += v;
    return s / static_cast<double>(y.size());
  }
  if (!(rho > 0.0)) throw Error(ErrorCode::kInvalidArgument, "rho must be > 0");
  const double m = *std::max_element(y.begin(), y.end());
  double s = 0.0;
  for (double v : y) s += std::exp(rho * (v - m));
  return m + std::log(s / static_cast<double>(y.size())) / rho;
}

double estimate_target(const std::function<double(std::mt19937_64&)>& draw, int K,
                       double rho, TargetMode mode, std::mt19937_64& rng) {
  if (K < 1) throw Error(ErrorCode::kInvalidArgument, "K must be >= 1");
  std::vector<double> y;
  y.reserve(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) y.push_back(draw(rng));
  return aggregate_target(y, rho, mode);
}

double sample_tabular_backup(const MarkovGame& game, const TabularPolicy& pi,
                             const TabularPolicy& mu, const ValueTable& v, int s,
                             std::mt19937_64& rng) {
  auto w = mu.row(s);
  std::discrete_distribution<int> pick(w.begin(), w.end());
  const int u = pick(rng);
  double x = 0.0;
  for (int a = 0; a < game.n_protagonist_actions(); ++a) {
    if (pi(s, a) == 0.0) continue;
    auto p = game.transition_row(s, a, u);
    double backed = 0.0;
    for (int next = 0; next < game.n_states(); ++next) {
      backed += p[next] * (game.reward(s, a, u) + game.gamma() * v.values[next]);
    }
    x += pi(s, a) * backed;
  }
  return x;
}

nn::NamedNetworks Networks::named() const {
  return {{"protagonist", protagonist},
          {"adversary", adversary},
          {"value", value},
          {"value_target", value_target}};
}

Networks Networks::from_named(const nn::NamedNetworks& nets) {
  Networks out;
  bool seen[4] = {false, false, false, false};
  for (const auto& [name, p] : nets) {
    if (name == "protagonist") {
      out.protagonist = p;
      seen[0] = true;
    } else if (name == "adversary") {
      out.adversary = p;
      seen[1] = true;
    } else if (name == "value") {
      out.value = p;
      seen[2] = true;
    } else if (name == "value_target") {
      out.value_target = p;
      seen[3] = true;
    }
  }
  if (!(seen[0] && seen[1] && seen[2] && seen[3])) {
    throw Error(ErrorCode::kShapeMismatch, "checkpoint lacks a network");
  }
  if (out.protagonist.input_dim() != pathtrack::kObsDim || out.protagonist.output_dim() != 4 ||
      out.adversary.output_dim() != 2 || out.value.output_dim() != 1) {
    throw Error(ErrorCode::kShapeMismatch, "checkpoint network shapes");
  }
  return out;
}

Networks init_networks(const TrainConfig& cfg, std::mt19937_64& rng) {
  auto sizes = [&](int out) {
    std::vector<int> s = {pathtrack::kObsDim};
    for (int l = 0; l < cfg.hidden_layers; ++l) s.push_back(cfg.hidden_units);
    s.push_back(out);
    return s;
  };
  Networks n;
  n.protagonist = nn::make_mlp(sizes(4), cfg.activation, nn::OutputActivation::kLinear, rng);
  n.adversary = nn::make_mlp(sizes(2), cfg.activation, nn::OutputActivation::kLinear, rng);
  n.value = nn::make_mlp(sizes(1), cfg.activation, nn::OutputActivation::kLinear, rng);
  n.value_target = n.value;
  for (nn::MlpParams* p : {&n.protagonist, &n.adversary}) {
    for (double& w : p->weights.back().data) w *= cfg.policy_init_scale;
    Matrix& b = p->biases.back();
    for (int j = b.cols / 2; j < b.cols; ++j) b(0, j) = cfg.init_logstd;
  }
  return n;
}

nn::SquashedGaussianHead protagonist_head(const pathtrack::ActionBounds& b) {
  return {{b.delta.lo, b.accel.lo}, {b.delta.hi, b.accel.hi}};
}

nn::SquashedGaussianHead adversary_head(const pathtrack::ActionBounds& b) {
  return {{b.dist.lo}, {b.dist.hi}};
}

Action mean_action(const nn::MlpParams& protagonist, const VehicleState& s,
                   const pathtrack::EnvConfig& env) {
  const Matrix out = nn::mlp_forward(protagonist, obs_row(s, env.mode));
  auto [mean, logstd] = split_head(out, 2);
  const Matrix a = nn::sample_squashed(protagonist_head(env.bounds), mean, logstd, Matrix(1, 2));
  return {a(0, 0), a(0, 1)};
}

double mean_disturbance(const nn::MlpParams& adversary, const VehicleState& s,
                        const pathtrack::EnvConfig& env) {
  const Matrix out = nn::mlp_forward(adversary, obs_row(s, env.mode));
  auto [mean, logstd] = split_head(out, 1);
  return nn::sample_squashed(adversary_head(env.bounds), mean, logstd, Matrix(1, 1))(0, 0);
}

pathtrack::EnvConfig env_for(const TrainConfig& cfg) {
  pathtrack::EnvConfig env;
  env.mode = cfg.path_mode;
  env.episode_steps = cfg.episode_steps;
  return env;
}

std::vector<double> compute_target_value(const std::vector<VehicleState>& states,
                                         const Networks& nets, const TrainConfig& cfg,
                                         std::mt19937_64& rng) {
  const pathtrack::EnvConfig env = env_for(cfg);
  const int B = static_cast<int>(states.size());
  const int K = cfg.K;
  const Matrix obs = pathtrack::observe_batch(states, env.mode);
  auto [pro_mean, pro_logstd] = split_head(nn::mlp_forward(nets.protagonist, obs), 2);
  Matrix adv_mean(B, 1), adv_logstd(B, 1);
  if (cfg.algorithm == Algorithm::kSaac || cfg.algorithm == Algorithm::kRarl) {
    std::tie(adv_mean, adv_logstd) = split_head(nn::mlp_forward(nets.adversary, obs), 1);
  }

  // Expand to B*K rows, state-major, drawing noise in a fixed order.
  const int n = B * K;
  Matrix mean_rep(n, 2), logstd_rep(n, 2), xi(n, 2), u_col(n, 1);
  Matrix adv_mean_rep(n, 1), adv_logstd_rep(n, 1), eta(n, 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(env.bounds.dist.lo, env.bounds.dist.hi);
  for (int i = 0; i < B; ++i) {
    for (int k = 0; k < K; ++k) {
      const int r = i * K + k;
      for (int j = 0; j < 2; ++j) {
        mean_rep(r, j) = pro_mean(i, j);
        logstd_rep(r, j) = pro_logstd(i, j);
        xi(r, j) = normal(rng);
      }
      adv_mean_rep(r, 0) = adv_mean(i, 0);
      adv_logstd_rep(r, 0) = adv_logstd(i, 0);
      switch (cfg.algorithm) {
        case Algorithm::kSaac:
        case Algorithm::kRarl:
          eta(r, 0) = normal(rng);
          break;
        case Algorithm::kSaacU:
          u_col(r, 0) = uniform(rng);
          break;
        case Algorithm::kAdp:
          break;
      }
    }
  }
  const Matrix actions =
      nn::sample_squashed(protagonist_head(env.bounds), mean_rep, logstd_rep, xi);
  if (cfg.algorithm == Algorithm::kSaac || cfg.algorithm == Algorithm::kRarl) {
    u_col = nn::sample_squashed(adversary_head(env.bounds), adv_mean_rep, adv_logstd_rep, eta);
  }

  std::vector<VehicleState> next(static_cast<std::size_t>(n));
  std::vector<double> cost(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) {
    const VehicleState& s = states[static_cast<std::size_t>(r / K)];
    const Action a{actions(r, 0), actions(r, 1)};
    cost[static_cast<std::size_t>(r)] = pathtrack::reward(s, a, u_col(r, 0));
    next[static_cast<std::size_t>(r)] = model_step(s, a, u_col(r, 0), env);
  }
  const Matrix v_next =
      nn::mlp_forward(nets.value_target, pathtrack::observe_batch(next, env.mode));

  const TargetMode mode = cfg.algorithm == Algorithm::kSaac || cfg.algorithm == Algorithm::kSaacU
                              ? TargetMode::kWlse
                              : TargetMode::kMean;
  std::vector<double> targets(static_cast<std::size_t>(B));
  std::vector<double> y(static_cast<std::size_t>(K));
  for (int i = 0; i < B; ++i) {
    for (int k = 0; k < K; ++k) {
      const int r = i * K + k;
      y[static_cast<std::size_t>(k)] =
          cfg.cost_scale * cost[static_cast<std::size_t>(r)] + cfg.gamma * v_next(r, 0);
    }
    targets[static_cast<std::size_t>(i)] = aggregate_target(y, cfg.rho, mode);
  }
  return targets;
}

double value_update(nn::MlpParams& value, nn::AdamState& adam,
                    const std::vector<VehicleState>& states,
                    const std::vector<double>& targets, double lr, pathtrack::PathMode mode) {
  if (states.size() != targets.size() || states.empty()) {
    throw Error(ErrorCode::kShapeMismatch, "states vs targets");
  }
  ad::Tape tape;
  const auto bound = nn::bind(tape, value);
  const ad::Var v =
      nn::mlp_forward(value, bound, tape.constant(pathtrack::observe_batch(states, mode)));
  const ad::Var y =
      tape.constant(Matrix(static_cast<int>(targets.size()), 1, targets));
  const ad::Var loss = 0.5 * ad::mean(ad::square(v - y));
  const double l = loss.item();
  if (!std::isfinite(l)) throw Error(ErrorCode::kNonFiniteLoss, "value loss " + format_sig(l));
  tape.backward(loss);
  const auto grads = nn::gradients(bound);
  check_finite(grads, "value network");
  nn::adam_step(value.tensors(), grads, adam, lr);
  return l;
}

PolicyObjective policy_objective(ad::Tape& tape, const Networks& nets,
                                 const std::vector<VehicleState>& states, const Matrix& xi,
                                 const Matrix& eta, const TrainConfig& cfg) {
  const pathtrack::EnvConfig env = env_for(cfg);
  const int B = static_cast<int>(states.size());
  PolicyObjective out;
  const pathtrack::StateVars s = pathtrack::state_constant(tape, states);
  const ad::Var obs = tape.constant(pathtrack::observe_batch(states, env.mode));

  out.protagonist = nn::bind(tape, nets.protagonist);
  const ad::Var pro = nn::mlp_forward(nets.protagonist, out.protagonist, obs);
  const ad::Var a = nn::sample_squashed(protagonist_head(env.bounds), ad::slice_cols(pro, 0, 2),
                                        ad::slice_cols(pro, 2, 2), tape.constant(xi));
  const ad::Var delta = ad::slice_cols(a, 0, 1);
  const ad::Var accel = ad::slice_cols(a, 1, 1);

  ad::Var u;
  if (cfg.algorithm == Algorithm::kAdp) {
    u = tape.constant(Matrix(B, 1));
  } else {
    out.adversary = nn::bind(tape, nets.adversary);
    const ad::Var adv = nn::mlp_forward(nets.adversary, out.adversary, obs);
    u = nn::sample_squashed(adversary_head(env.bounds), ad::slice_cols(adv, 0, 1),
                            ad::slice_cols(adv, 1, 1), tape.constant(eta));
  }

  const pathtrack::StateVars next =
      pathtrack::dynamics_step(s, delta, accel, u, env.vehicle, env.mode);
  const ad::Var cost = pathtrack::reward(s, delta, accel);
  const auto critic = nn::bind(tape, nets.value, /*trainable=*/false);
  const ad::Var v_next = nn::mlp_forward(nets.value, critic, pathtrack::observe(next, env.mode));
  out.value = ad::mean(cfg.cost_scale * cost + cfg.gamma * v_next);
  return out;
}

PolicyStepResult policy_update(Networks& nets, nn::AdamState& pro_adam,
                               nn::AdamState& adv_adam, const std::vector<VehicleState>& states,
                               const Matrix& xi, const Matrix& eta, const TrainConfig& cfg,
                               long iteration, double lr) {
  ad::Tape tape;
  const PolicyObjective j = policy_objective(tape, nets, states, xi, eta, cfg);
  PolicyStepResult r;
  r.objective = j.value.item();
  if (!std::isfinite(r.objective)) {
    throw Error(ErrorCode::kNonFiniteLoss, "policy objective " + format_sig(r.objective));
  }
  tape.backward(j.value);
  const auto pro_grads = nn::gradients(j.protagonist);
  check_finite(pro_grads, "protagonist");
  const bool step_adversary = cfg.algorithm != Algorithm::kAdp && iteration % cfg.M == 0;
  std::vector<Matrix> adv_grads;
  if (step_adversary) {
    adv_grads = nn::gradients(j.adversary);
    check_finite(adv_grads, "adversary");
  }
  nn::adam_step(nets.protagonist.tensors(), pro_grads, pro_adam, lr);
  if (step_adversary) {
    // Ascent: descend on -J.
    for (Matrix& g : adv_grads) {
      for (double& v : g.data) v = -v;
    }
    nn::adam_step(nets.adversary.tensors(), adv_grads, adv_adam, lr);
    r.adversary_stepped = true;
  }
  return r;
}

EvalResult evaluate(const nn::MlpParams& protagonist, const pathtrack::EnvConfig& env,
                    int episodes, int steps, std::uint64_t eval_seed, double disturbance) {
  if (episodes < 1) throw Error(ErrorCode::kInvalidArgument, "episodes must be >= 1");
  std::vector<EvalResult> parts(static_cast<std::size_t>(episodes));
#pragma omp parallel for schedule(static)
  for (int e = 0; e < episodes; ++e) {
    parts[static_cast<std::size_t>(e)] =
        run_episode(protagonist, env, steps, eval_seed + static_cast<std::uint64_t>(e), disturbance);
  }
  return average(parts);
}

EvalResult evaluate_serial(const nn::MlpParams& protagonist, const pathtrack::EnvConfig& env,
                           int episodes, int steps, std::uint64_t eval_seed,
                           double disturbance) {
  if (episodes < 1) throw Error(ErrorCode::kInvalidArgument, "episodes must be >= 1");
  std::vector<EvalResult> parts;
  for (int e = 0; e < episodes; ++e) {
    parts.push_back(
        run_episode(protagonist, env, steps, eval_seed + static_cast<std::uint64_t>(e), disturbance));
  }
  return average(parts);
}

std::vector<double> disturbance_grid(double lo, double step, double hi) {
  if (!(step > 0.0) || !(hi >= lo)) {
    throw Error(ErrorCode::kConfigError, "grid needs step > 0 and hi >= lo");
  }
  // Integer stepping avoids accumulating rounding; values are snapped to
  // the step's decimal resolution so 0 prints as 0.
  const long n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  std::vector<double> out;
  for (long i = 0; i <= n; ++i) {
    const double v = lo + static_cast<double>(i) * step;
    out.push_back(std::round(v * 1e9) / 1e9);
  }
  return out;
}

std::vector<double> default_sweep_grid() { return disturbance_grid(-0.3, 0.06, 0.3); }

std::vector<SweepRow> robustness_sweep(const nn::MlpParams& protagonist,
                                       const pathtrack::EnvConfig& env,
                                       const std::vector<double>& grid, int episodes,
                                       int steps, std::uint64_t eval_seed) {
  std::vector<SweepRow> rows;
  for (double d : grid) {
    rows.push_back({d, evaluate(protagonist, env, episodes, steps, eval_seed, d)});
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "disturbance,tar,pos_err,head_err\n";
  for (const SweepRow& r : rows) {
    out << format_sig(r.disturbance) << ',' << format_sig(r.result.tar) << ','
        << format_sig(r.result.pos_err) << ',' << format_sig(r.result.head_err) << '\n';
  }
  return out.str();
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::ostringstream out;
  out << "iteration,algo,value_loss,tar,pos_err,head_err,wall_ms\n";
  for (const MetricsRow& r : rows) {
    out << r.iteration << ',' << to_string(r.algo) << ','
        << (r.has_losses ? format_sig(r.value_loss) : std::string()) << ','
        << format_sig(r.eval.tar) << ',' << format_sig(r.eval.pos_err) << ','
        << format_sig(r.eval.head_err) << ',' << format_sig(r.wall_ms) << '\n';
  }
  return out.str();
}

TrainResult train(const TrainConfig& cfg) {
  validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed_ms = [&] {
    if (!cfg.record_wall_time) return 0.0;
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  };
  const pathtrack::EnvConfig env = env_for(cfg);
  std::mt19937_64 init_rng = stream(cfg.seed, 1);
  std::mt19937_64 sample_rng = stream(cfg.seed, 2);
  std::mt19937_64 opt_rng = stream(cfg.seed, 3);

  TrainResult result;
  Networks nets = init_networks(cfg, init_rng);
  nn::AdamState value_adam = nn::adam_init(std::as_const(nets.value).tensors());
  nn::AdamState pro_adam = nn::adam_init(std::as_const(nets.protagonist).tensors());
  nn::AdamState adv_adam = nn::adam_init(std::as_const(nets.adversary).tensors());
  ReplayBuffer buffer(cfg.replay_capacity);

  auto evaluate_now = [&](long iteration, double loss_sum, double obj_sum, long count) {
    MetricsRow row;
    row.iteration = iteration;
    row.algo = cfg.algorithm;
    row.has_losses = count > 0;
    if (count > 0) {
      row.value_loss = loss_sum / static_cast<double>(count);
      row.policy_objective = obj_sum / static_cast<double>(count);
    }
    row.eval = evaluate(nets.protagonist, env, cfg.eval_episodes, cfg.eval_steps, cfg.eval_seed);
    row.wall_ms = elapsed_ms();
    result.history.push_back(row);
    if (result.history.size() == 1 || row.eval.tar > result.best_tar) {
      result.best_tar = row.eval.tar;
      result.best_nets = nets;
    }
  };
  evaluate_now(0, 0.0, 0.0, 0);

  const bool uses_adversary = cfg.algorithm != Algorithm::kAdp;
  const nn::SquashedGaussianHead pro_head = protagonist_head(env.bounds);
  const nn::SquashedGaussianHead adv_head = adversary_head(env.bounds);
  long iteration = 0;
  double loss_sum = 0.0, obj_sum = 0.0;
  long count = 0;
  while (iteration < cfg.iterations) {
    // Sampling phase: one episode with the stochastic policies, cut short
    // once the vehicle leaves the sampling corridor.
    VehicleState s = pathtrack::reset(sample_rng);
    for (int t = 0; t < cfg.episode_steps; ++t) {
      const Matrix obs = obs_row(s, env.mode);
      auto [mean, logstd] = split_head(nn::mlp_forward(nets.protagonist, obs), 2);
      const Matrix a = nn::sample_squashed(pro_head, mean, logstd, normal_matrix(1, 2, sample_rng));
      double u = 0.0;
      if (uses_adversary) {
        auto [am, al] = split_head(nn::mlp_forward(nets.adversary, obs), 1);
        u = nn::sample_squashed(adv_head, am, al, normal_matrix(1, 1, sample_rng))(0, 0);
      }
      const Action act{a(0, 0), a(0, 1)};
      const VehicleState next = model_step(s, act, u, env);
      buffer.add({s, act, u, pathtrack::reward(s, act, u), next});
      s = next;
      if (outside_corridor(s, cfg)) break;
    }
    if (buffer.size() < std::max(cfg.warmup, 1)) continue;

    // Optimizing phase.
    for (int j = 0; j < cfg.updates_per_episode && iteration < cfg.iterations; ++j) {
      const auto batch = buffer.sample(cfg.batch_size, opt_rng);
      std::vector<VehicleState> states;
      states.reserve(batch.size());
      for (const Transition& tr : batch) states.push_back(tr.s);

      const double v_lr = nn::cosine_lr(iteration, cfg.iterations, cfg.value_lr_hi, cfg.value_lr_lo);
      const double p_lr =
          nn::cosine_lr(iteration, cfg.iterations, cfg.policy_lr_hi, cfg.policy_lr_lo);
      const auto targets = compute_target_value(states, nets, cfg, opt_rng);
      loss_sum += value_update(nets.value, value_adam, states, targets, v_lr, env.mode);
      nn::polyak_update(nets.value_target, nets.value, cfg.tau);

      const Matrix xi = normal_matrix(cfg.batch_size, 2, opt_rng);
      const Matrix eta = normal_matrix(cfg.batch_size, 1, opt_rng);
      obj_sum += policy_update(nets, pro_adam, adv_adam, states, xi, eta, cfg, iteration, p_lr)
                     .objective;
      ++count;
      ++iteration;
      if (iteration % cfg.eval_interval == 0 || iteration == cfg.iterations) {
        evaluate_now(iteration, loss_sum, obj_sum, count);
        loss_sum = obj_sum = 0.0;
        count = 0;
      }
    }
  }
  result.final_nets = nets;
  if (result.history.size() > 1 && result.history.back().eval.tar <= result.history.front().eval.tar) {
    result.warnings.push_back("NotImproving: final TAR " + format_sig(result.history.back().eval.tar) +
                              " is not above the initial " +
                              format_sig(result.history.front().eval.tar));
  }
  return result;
}

}  // namespace mgsmooth::saac
