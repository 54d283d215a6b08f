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


#include "mgsmooth/nn.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "mgsmooth/error.h"

namespace mgsmooth::nn {
namespace {

using nlohmann::json;

constexpr double kRelErrorFloor = 1e-6;

Matrix apply_hidden(HiddenActivation act, Matrix x) {
  for (double& v : x.data) {
    v = act == HiddenActivation::kGelu ? ad::gelu_value(v) : std::tanh(v);
  }
  return x;
}

const char* hidden_name(HiddenActivation a) {
  return a == HiddenActivation::kGelu ? "gelu" : "tanh";
}

const char* output_name(OutputActivation a) {
  return a == OutputActivation::kLinear ? "linear" : "tanh_squash";
}

json matrix_to_json(const Matrix& m) {
  return {{"shape", {m.rows, m.cols}}, {"data", m.data}};
}

Matrix matrix_from_json(const json& j) {
  const auto shape = j.at("shape").get<std::vector<int>>();
  if (shape.size() != 2 || shape[0] < 0 || shape[1] < 0) {
    throw Error(ErrorCode::kShapeMismatch, "bad tensor shape");
  }
  auto data = j.at("data").get<std::vector<double>>();
  if (data.size() != static_cast<std::size_t>(shape[0]) * shape[1]) {
    throw Error(ErrorCode::kShapeMismatch, "tensor data does not match shape");
  }
  return Matrix(shape[0], shape[1], std::move(data));
}

json mlp_to_json(const MlpParams& p) {
  json tensors = json::object();
  const auto names = p.tensor_names();
  const auto ts = p.tensors();
  for (std::size_t i = 0; i < names.size(); ++i) {
    tensors[names[i]] = matrix_to_json(*ts[i]);
  }
  return {{"sizes", p.sizes},
          {"hidden", hidden_name(p.hidden)},
          {"output", output_name(p.output)},
          {"tensors", tensors}};
}

MlpParams mlp_from_json(const json& j) {
  MlpParams p;
  p.sizes = j.at("sizes").get<std::vector<int>>();
  if (p.sizes.size() < 2) throw Error(ErrorCode::kShapeMismatch, "need >= 2 sizes");
  const auto hidden = j.at("hidden").get<std::string>();
  const auto output = j.at("output").get<std::string>();
  if (hidden != "gelu" && hidden != "tanh") {
    throw Error(ErrorCode::kConfigError, "unknown hidden activation " + hidden);
  }
  if (output != "linear" && output != "tanh_squash") {
    throw Error(ErrorCode::kConfigError, "unknown output activation " + output);
  }
  p.hidden = hidden == "gelu" ? HiddenActivation::kGelu : HiddenActivation::kTanh;
  p.output = output == "linear" ? OutputActivation::kLinear
                                : OutputActivation::kTanhSquash;
  const json& t = j.at("tensors");
  for (std::size_t l = 0; l + 1 < p.sizes.size(); ++l) {
    p.weights.push_back(matrix_from_json(t.at("w" + std::to_string(l))));
    p.biases.push_back(matrix_from_json(t.at("b" + std::to_string(l))));
  }
  validate(p);
  return p;
}

double norm(const Matrix& m) {
  double s = 0.0;
  for (double v : m.data) s += v * v;
  return std::sqrt(s);
}

}  // namespace

std::vector<Matrix*> MlpParams::tensors() {
  std::vector<Matrix*> out;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    out.push_back(&weights[l]);
    out.push_back(&biases[l]);
  }
  return out;
}

std::vector<const Matrix*> MlpParams::tensors() const {
  std::vector<const Matrix*> out;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    out.push_back(&weights[l]);
    out.push_back(&biases[l]);
  }
  return out;
}

std::vector<std::string> MlpParams::tensor_names() const {
  std::vector<std::string> out;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    out.push_back("w" + std::to_string(l));
    out.push_back("b" + std::to_string(l));
  }
  return out;
}

MlpParams make_mlp(std::vector<int> sizes, HiddenActivation hidden,
                   OutputActivation output, std::mt19937_64& rng) {
  if (sizes.size() < 2) throw Error(ErrorCode::kShapeMismatch, "need >= 2 sizes");
  for (int s : sizes) {
    if (s < 1) throw Error(ErrorCode::kInvalidArgument, "layer width must be >= 1");
  }
  MlpParams p;
  p.sizes = std::move(sizes);
  p.hidden = hidden;
  p.output = output;
  for (std::size_t l = 0; l + 1 < p.sizes.size(); ++l) {
    const int in = p.sizes[l];
    const int out = p.sizes[l + 1];
    const double a = std::sqrt(6.0 / (in + out));
    std::uniform_real_distribution<double> d(-a, a);
    Matrix w(in, out);
    for (double& v : w.data) v = d(rng);
    p.weights.push_back(std::move(w));
    p.biases.emplace_back(1, out);
  }
  return p;
}

void validate(const MlpParams& p) {
  if (p.sizes.size() < 2 || p.weights.size() + 1 != p.sizes.size() ||
      p.biases.size() != p.weights.size()) {
    throw Error(ErrorCode::kShapeMismatch, "layer count does not match sizes");
  }
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    if (p.weights[l].rows != p.sizes[l] || p.weights[l].cols != p.sizes[l + 1] ||
        p.biases[l].rows != 1 || p.biases[l].cols != p.sizes[l + 1]) {
      throw Error(ErrorCode::kShapeMismatch,
                  "layer " + std::to_string(l) + " breaks the size chain");
    }
  }
  for (const Matrix* t : p.tensors()) {
    for (double v : t->data) {
      if (!std::isfinite(v)) throw Error(ErrorCode::kDegenerateInput, "non-finite weight");
    }
  }
}

Matrix mlp_forward(const MlpParams& p, const Matrix& input) {
  if (input.cols != p.input_dim()) {
    throw Error(ErrorCode::kShapeMismatch, "input width " + std::to_string(input.cols) +
                                               " vs " + std::to_string(p.input_dim()));
  }
  Matrix x = input;
  for (int l = 0; l < p.n_layers(); ++l) {
    Matrix y = ad::matmul_values(x, p.weights[static_cast<std::size_t>(l)]);
    const Matrix& b = p.biases[static_cast<std::size_t>(l)];
    for (int i = 0; i < y.rows; ++i) {
      for (int j = 0; j < y.cols; ++j) y(i, j) += b(0, j);
    }
    if (l + 1 < p.n_layers()) {
      x = apply_hidden(p.hidden, std::move(y));
    } else {
      if (p.output == OutputActivation::kTanhSquash) {
        for (double& v : y.data) v = std::tanh(v);
      }
      x = std::move(y);
    }
  }
  return x;
}

std::vector<ad::Var> bind(ad::Tape& tape, const MlpParams& p, bool trainable) {
  std::vector<ad::Var> out;
  for (const Matrix* t : p.tensors()) {
    out.push_back(trainable ? tape.variable(*t) : tape.constant(*t));
  }
  return out;
}

ad::Var mlp_forward(const MlpParams& p, const std::vector<ad::Var>& bound,
                    ad::Var input) {
  if (bound.size() != 2 * p.weights.size()) {
    throw Error(ErrorCode::kShapeMismatch, "bound tensors do not match network");
  }
  if (input.cols() != p.input_dim()) {
    throw Error(ErrorCode::kShapeMismatch, "input width " + std::to_string(input.cols()) +
                                               " vs " + std::to_string(p.input_dim()));
  }
  ad::Var x = input;
  for (int l = 0; l < p.n_layers(); ++l) {
    ad::Var y = ad::matmul(x, bound[2 * l]) + bound[2 * l + 1];
    if (l + 1 < p.n_layers()) {
      x = p.hidden == HiddenActivation::kGelu ? ad::gelu(y) : ad::tanh(y);
    } else {
      x = p.output == OutputActivation::kTanhSquash ? ad::tanh(y) : y;
    }
  }
  return x;
}

std::vector<Matrix> gradients(const std::vector<ad::Var>& bound) {
  std::vector<Matrix> out;
  for (const ad::Var& v : bound) {
    const Matrix& g = v.grad();
    out.push_back(g.size() == 0 ? Matrix(v.rows(), v.cols()) : g);
  }
  return out;
}

std::vector<double> SquashedGaussianHead::half_range() const {
  std::vector<double> out;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    out.push_back(0.5 * (hi[i] - lo[i]) * kInteriorShrink);
  }
  return out;
}

std::vector<double> SquashedGaussianHead::midpoint() const {
  std::vector<double> out;
  for (std::size_t i = 0; i < lo.size(); ++i) out.push_back(0.5 * (hi[i] + lo[i]));
  return out;
}

ad::Var sample_squashed(const SquashedGaussianHead& head, ad::Var mean_raw,
                        ad::Var logstd_raw, ad::Var noise) {
  if (mean_raw.cols() != head.dim()) {
    throw Error(ErrorCode::kShapeMismatch, "head dimension");
  }
  ad::Var std = ad::exp(ad::clamp_straight_through(
      logstd_raw, SquashedGaussianHead::kLogStdMin, SquashedGaussianHead::kLogStdMax));
  ad::Var z = mean_raw + std * noise;
  return ad::affine(ad::tanh(z), head.half_range(), head.midpoint());
}

Matrix sample_squashed(const SquashedGaussianHead& head, const Matrix& mean_raw,
                       const Matrix& logstd_raw, const Matrix& noise) {
  if (mean_raw.cols != head.dim() || !mean_raw.same_shape(logstd_raw) ||
      !mean_raw.same_shape(noise)) {
    throw Error(ErrorCode::kShapeMismatch, "head inputs");
  }
  const auto half = head.half_range();
  const auto mid = head.midpoint();
  Matrix a(mean_raw.rows, mean_raw.cols);
  for (int i = 0; i < a.rows; ++i) {
    for (int j = 0; j < a.cols; ++j) {
      const double ls = std::clamp(logstd_raw(i, j), SquashedGaussianHead::kLogStdMin,
                                   SquashedGaussianHead::kLogStdMax);
      const double z = mean_raw(i, j) + std::exp(ls) * noise(i, j);
      a(i, j) = half[static_cast<std::size_t>(j)] * std::tanh(z) + mid[static_cast<std::size_t>(j)];
    }
  }
  return a;
}

AdamState adam_init(const std::vector<const Matrix*>& params) {
  AdamState s;
  for (const Matrix* p : params) {
    s.m.emplace_back(p->rows, p->cols);
    s.v.emplace_back(p->rows, p->cols);
  }
  return s;
}

void adam_step(const std::vector<Matrix*>& params, const std::vector<Matrix>& grads,
               AdamState& state, double lr, const AdamConfig& cfg) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw Error(ErrorCode::kShapeMismatch, "adam tensor count");
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t t = 0; t < params.size(); ++t) {
    Matrix& p = *params[t];
    const Matrix& g = grads[t];
    Matrix& m = state.m[t];
    Matrix& v = state.v[t];
    if (!p.same_shape(g) || !p.same_shape(m)) {
      throw Error(ErrorCode::kShapeMismatch, "adam tensor " + std::to_string(t));
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
      m.data[i] = cfg.beta1 * m.data[i] + (1.0 - cfg.beta1) * g.data[i];
      v.data[i] = cfg.beta2 * v.data[i] + (1.0 - cfg.beta2) * g.data[i] * g.data[i];
      const double mhat = m.data[i] / c1;
      const double vhat = v.data[i] / c2;
      p.data[i] -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

double cosine_lr(long step, long total, double lr_hi, double lr_lo) {
  if (total <= 0 || step >= total) return lr_lo;
  if (step <= 0) return lr_hi;
  const double frac = static_cast<double>(step) / static_cast<double>(total);
  return lr_lo + 0.5 * (lr_hi - lr_lo) * (1.0 + std::cos(std::numbers::pi * frac));
}

void polyak_update(MlpParams& target, const MlpParams& online, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "tau must be in (0, 1]");
  }
  auto dst = target.tensors();
  auto src = online.tensors();
  if (dst.size() != src.size()) throw Error(ErrorCode::kShapeMismatch, "polyak layers");
  for (std::size_t t = 0; t < dst.size(); ++t) {
    if (!dst[t]->same_shape(*src[t])) {
      throw Error(ErrorCode::kShapeMismatch, "polyak tensor " + std::to_string(t));
    }
    if (tau == 1.0) {
      *dst[t] = *src[t];
      continue;
    }
    for (std::size_t i = 0; i < dst[t]->size(); ++i) {
      dst[t]->data[i] = tau * src[t]->data[i] + (1.0 - tau) * dst[t]->data[i];
    }
  }
}

std::string checkpoint_to_string(const NamedNetworks& nets) {
  json j = json::object();
  for (const auto& [name, p] : nets) j[name] = mlp_to_json(p);
  return j.dump(1);
}

NamedNetworks checkpoint_from_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIoError, std::string("checkpoint parse: ") + e.what());
  }
  NamedNetworks out;
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      out.emplace_back(it.key(), mlp_from_json(it.value()));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kShapeMismatch, std::string("checkpoint layout: ") + e.what());
  }
  return out;
}

void save_checkpoint(const std::string& path, const NamedNetworks& nets) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::kIoError, "cannot write " + path);
  f << checkpoint_to_string(nets) << '\n';
  if (!f) throw Error(ErrorCode::kIoError, "write failed: " + path);
}

NamedNetworks load_checkpoint(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::kIoError, "cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return checkpoint_from_string(ss.str());
}

double relative_error(const Matrix& a, const Matrix& b, double floor) {
  if (!a.same_shape(b)) throw Error(ErrorCode::kShapeMismatch, "relative_error");
  Matrix d = a;
  for (std::size_t i = 0; i < d.size(); ++i) d.data[i] -= b.data[i];
  return norm(d) / std::max({norm(a), norm(b), floor});
}

GradCheckResult check_gradient(const ScalarFn& f, const std::vector<Matrix>& inputs,
                               double h, FdStencil stencil) {
  std::vector<Matrix> analytic;
  double f0 = 0.0;
  {
    ad::Tape tape;
    std::vector<ad::Var> vars;
    for (const Matrix& m : inputs) vars.push_back(tape.variable(m));
    const ad::Var root = f(tape, vars);
    f0 = root.item();
    tape.backward(root);
    for (const ad::Var& v : vars) {
      analytic.push_back(v.grad().size() == 0 ? Matrix(v.rows(), v.cols()) : v.grad());
    }
  }
  auto eval = [&](const std::vector<Matrix>& xs) {
    ad::Tape tape;
    std::vector<ad::Var> vars;
    for (const Matrix& m : xs) vars.push_back(tape.constant(m));
    return f(tape, vars).item();
  };
  GradCheckResult r;
  std::vector<Matrix> xs = inputs;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    Matrix numeric(xs[k].rows, xs[k].cols);
    for (std::size_t i = 0; i < xs[k].size(); ++i) {
      const double x0 = xs[k].data[i];
      auto at = [&](double offset) {
        xs[k].data[i] = x0 + offset;
        const double v = eval(xs);
        xs[k].data[i] = x0;
        return v;
      };
      if (stencil == FdStencil::kCentral) {
        numeric.data[i] = (at(h) - at(-h)) / (2.0 * h);
      } else {
        numeric.data[i] =
            (-at(2 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2 * h)) / (12.0 * h);
      }
    }
    const double e = relative_error(analytic[k], numeric,
                                    kRelErrorFloor * std::max(1.0, std::abs(f0)));
    r.rel_errors.push_back(e);
    r.max_rel_error = std::max(r.max_rel_error, e);
  }
  return r;
}

}  // namespace mgsmooth::nn
