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


#ifndef MGSMOOTH_NN_H_
#define MGSMOOTH_NN_H_

#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "mgsmooth/autodiff.h"
#include "mgsmooth/dense.h"

namespace mgsmooth::nn {

enum class HiddenActivation { kGelu, kTanh };
enum class OutputActivation { kLinear, kTanhSquash };

// Fully connected network y = act(x W + b) per layer. W is in x out and b is
// 1 x out, so a batch is one row per sample.
struct MlpParams {
  std::vector<int> sizes;  // input, hidden..., output
  HiddenActivation hidden = HiddenActivation::kGelu;
  OutputActivation output = OutputActivation::kLinear;
  std::vector<Matrix> weights;
  std::vector<Matrix> biases;

  int n_layers() const { return static_cast<int>(weights.size()); }
  int input_dim() const { return sizes.front(); }
  int output_dim() const { return sizes.back(); }

  // Interleaved w0, b0, w1, b1, ...
  std::vector<Matrix*> tensors();
  std::vector<const Matrix*> tensors() const;
  std::vector<std::string> tensor_names() const;

  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

// Xavier-uniform weights, zero biases.
MlpParams make_mlp(std::vector<int> sizes, HiddenActivation hidden,
                   OutputActivation output, std::mt19937_64& rng);

// Throws kShapeMismatch if the layer chain is broken, kDegenerateInput on a
// non-finite entry.
void validate(const MlpParams& params);

// No-tape forward pass.
Matrix mlp_forward(const MlpParams& params, const Matrix& input);

// Puts every tensor on the tape: as variables when trainable, otherwise as
// constants (a frozen critic or target network).
std::vector<ad::Var> bind(ad::Tape& tape, const MlpParams& params,
                          bool trainable = true);

// Taped forward pass using tensors returned by bind().
ad::Var mlp_forward(const MlpParams& params, const std::vector<ad::Var>& bound,
                    ad::Var input);

// Gradients of the bound tensors after Tape::backward, zero-filled where no
// gradient reached.
std::vector<Matrix> gradients(const std::vector<ad::Var>& bound);

// Tanh-squashed Gaussian action head.
struct SquashedGaussianHead {
  static constexpr double kLogStdMin = -20.0;
  static constexpr double kLogStdMax = 2.0;
  // tanh is shrunk by this factor so saturated inputs stay strictly inside
  // the bounds in floating point.
  static constexpr double kInteriorShrink = 1.0 - 1e-9;

  std::vector<double> lo;
  std::vector<double> hi;

  int dim() const { return static_cast<int>(lo.size()); }
  std::vector<double> half_range() const;
  std::vector<double> midpoint() const;
};

// action = lo + (hi - lo)(tanh(mean_raw + exp(clamp(logstd_raw)) noise) + 1)/2
// Noise is drawn by the caller. The log-std clamp passes gradients straight
// through.
ad::Var sample_squashed(const SquashedGaussianHead& head, ad::Var mean_raw,
                        ad::Var logstd_raw, ad::Var noise);
Matrix sample_squashed(const SquashedGaussianHead& head, const Matrix& mean_raw,
                       const Matrix& logstd_raw, const Matrix& noise);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  long step = 0;
};

AdamState adam_init(const std::vector<const Matrix*>& params);

// One bias-corrected Adam step. Throws kShapeMismatch.
void adam_step(const std::vector<Matrix*>& params,
               const std::vector<Matrix>& grads, AdamState& state, double lr,
               const AdamConfig& cfg = {});

// Cosine annealing from lr_hi at step 0 to lr_lo at step >= total.
double cosine_lr(long step, long total, double lr_hi, double lr_lo);

// target <- tau * online + (1 - tau) * target. Throws kShapeMismatch,
// kInvalidArgument for tau outside (0, 1].
void polyak_update(MlpParams& target, const MlpParams& online, double tau);

// Checkpoints: JSON object of named networks, each with its layer sizes,
// activations and tensors stored as {shape, data}.
using NamedNetworks = std::vector<std::pair<std::string, MlpParams>>;
std::string checkpoint_to_string(const NamedNetworks& nets);
NamedNetworks checkpoint_from_string(const std::string& text);
void save_checkpoint(const std::string& path, const NamedNetworks& nets);
NamedNetworks load_checkpoint(const std::string& path);

// Finite-difference gradient check of a scalar tape function.
// Relative error per input is ||g_tape - g_fd|| / max(||g_tape||, ||g_fd||,
// 1e-6 max(1, |f(x)|)). Finite differences cannot resolve gradients much
// below eps |f| / h, so the floor keeps structurally zero gradients from
// turning rounding noise into a relative error of 1.
enum class FdStencil {
  kCentral,    // (f(x+h) - f(x-h)) / 2h
  kFivePoint,  // fourth order; allows a larger h when inputs are large
};
struct GradCheckResult {
  std::vector<double> rel_errors;  // one per input
  double max_rel_error = 0.0;
};
using ScalarFn = std::function<ad::Var(ad::Tape&, const std::vector<ad::Var>&)>;
GradCheckResult check_gradient(const ScalarFn& f,
                               const std::vector<Matrix>& inputs,
                               double h = 1e-5,
                               FdStencil stencil = FdStencil::kCentral);
double relative_error(const Matrix& a, const Matrix& b, double floor = 1e-6);

}  // namespace mgsmooth::nn

#endif  // MGSMOOTH_NN_H_
