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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include "mgsmooth/error.h"

namespace mgsmooth {
namespace {

using ad::Tape;
using ad::Var;
using nn::HiddenActivation;
using nn::MlpParams;
using nn::OutputActivation;

Matrix random_matrix(std::mt19937_64& rng, int r, int c, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  Matrix m(r, c);
  for (double& v : m.data) v = d(rng);
  return m;
}

nn::SquashedGaussianHead unit_head(int dim) {
  return {std::vector<double>(static_cast<std::size_t>(dim), -1.0),
          std::vector<double>(static_cast<std::size_t>(dim), 1.0)};
}

TEST(Mlp, ZeroNetworkOutputsZero) {
  std::mt19937_64 rng(1);
  MlpParams p = nn::make_mlp({3, 5, 2}, HiddenActivation::kGelu,
                             OutputActivation::kLinear, rng);
  for (Matrix* t : p.tensors()) std::fill(t->data.begin(), t->data.end(), 0.0);
  const Matrix y = nn::mlp_forward(p, random_matrix(rng, 4, 3, -1, 1));
  for (double v : y.data) EXPECT_EQ(v, 0.0);
}

TEST(Mlp, IdentityLayer) {
  std::mt19937_64 rng(2);
  MlpParams p = nn::make_mlp({3, 3}, HiddenActivation::kTanh,
                             OutputActivation::kLinear, rng);
  p.weights[0] = Matrix(3, 3);
  for (int i = 0; i < 3; ++i) p.weights[0](i, i) = 1.0;
  const Matrix x = random_matrix(rng, 5, 3, -1, 1);
  EXPECT_EQ(nn::mlp_forward(p, x), x);
}

TEST(Mlp, TapeForwardMatchesFastPath) {
  std::mt19937_64 rng(3);
  for (auto hidden : {HiddenActivation::kGelu, HiddenActivation::kTanh}) {
    for (auto out : {OutputActivation::kLinear, OutputActivation::kTanhSquash}) {
      MlpParams p = nn::make_mlp({4, 16, 16, 3}, hidden, out, rng);
      const Matrix x = random_matrix(rng, 7, 4, -2, 2);
      Tape t;
      Var y = nn::mlp_forward(p, nn::bind(t, p), t.constant(x));
      EXPECT_EQ(y.value(), nn::mlp_forward(p, x));
    }
  }
}

TEST(Mlp, ParameterGradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(4);
  for (auto hidden : {HiddenActivation::kGelu, HiddenActivation::kTanh}) {
    for (int trial = 0; trial < 10; ++trial) {
      MlpParams p = nn::make_mlp({2, 8, 1}, hidden, OutputActivation::kLinear, rng);
      for (Matrix& b : p.biases) b = random_matrix(rng, b.rows, b.cols, -0.5, 0.5);
      const Matrix x = random_matrix(rng, 6, 2, -2, 2);
      std::vector<Matrix> inputs;
      for (const Matrix* t : std::as_const(p).tensors()) inputs.push_back(*t);
      inputs.push_back(x);
      auto f = [&](Tape&, const std::vector<Var>& in) {
        std::vector<Var> bound(in.begin(), in.end() - 1);
        return ad::sum(nn::mlp_forward(p, bound, in.back()));
      };
      const auto r = nn::check_gradient(f, inputs);
      EXPECT_LT(r.max_rel_error, 1e-5);
    }
  }
}

TEST(Mlp, ValidateRejectsBrokenChain) {
  std::mt19937_64 rng(5);
  MlpParams p = nn::make_mlp({3, 4, 2}, HiddenActivation::kGelu,
                             OutputActivation::kLinear, rng);
  EXPECT_NO_THROW(nn::validate(p));
  MlpParams bad = p;
  bad.weights[1] = Matrix(5, 2);
  EXPECT_THROW(nn::validate(bad), Error);
  bad = p;
  bad.biases[0](0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(nn::validate(bad), Error);
  EXPECT_THROW(nn::mlp_forward(p, Matrix(2, 4)), Error);
}

TEST(Mlp, InitIsDeterministicPerSeed) {
  std::mt19937_64 a(9), b(9);
  EXPECT_EQ(nn::make_mlp({3, 8, 1}, HiddenActivation::kGelu, OutputActivation::kLinear, a),
            nn::make_mlp({3, 8, 1}, HiddenActivation::kGelu, OutputActivation::kLinear, b));
}

TEST(SquashedGaussian, MidpointAtZero) {
  nn::SquashedGaussianHead head{{-0.4}, {0.4}};
  const Matrix a = nn::sample_squashed(head, Matrix(1, 1, 0.0), Matrix(1, 1, 0.0),
                                       Matrix(1, 1, 0.0));
  EXPECT_DOUBLE_EQ(a(0, 0), 0.0);
}

TEST(SquashedGaussian, SaturatesBelowUpperBound) {
  nn::SquashedGaussianHead head{{-0.4, -1.5}, {0.4, 3.0}};
  const Matrix a = nn::sample_squashed(head, Matrix(1, 2, 50.0), Matrix(1, 2, 0.0),
                                       Matrix(1, 2, 0.0));
  EXPECT_LT(a(0, 0), 0.4);
  EXPECT_NEAR(a(0, 0), 0.4, 1e-8);
  EXPECT_LT(a(0, 1), 3.0);
  EXPECT_NEAR(a(0, 1), 3.0, 1e-8);
}

TEST(SquashedGaussian, AlwaysStrictlyInside) {
  std::mt19937_64 rng(6);
  nn::SquashedGaussianHead head{{-0.4, -1.5}, {0.4, 3.0}};
  for (int trial = 0; trial < 200; ++trial) {
    const double scale = std::pow(10.0, trial % 8 - 2);
    const Matrix mean = random_matrix(rng, 5, 2, -scale, scale);
    const Matrix logstd = random_matrix(rng, 5, 2, -30, 30);
    const Matrix noise = random_matrix(rng, 5, 2, -scale, scale);
    const Matrix a = nn::sample_squashed(head, mean, logstd, noise);
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 2; ++j) {
        EXPECT_GT(a(i, j), head.lo[static_cast<std::size_t>(j)]);
        EXPECT_LT(a(i, j), head.hi[static_cast<std::size_t>(j)]);
      }
    }
  }
}

TEST(SquashedGaussian, TapeMatchesFastPath) {
  std::mt19937_64 rng(7);
  nn::SquashedGaussianHead head{{-0.4, -1.5}, {0.4, 3.0}};
  const Matrix mean = random_matrix(rng, 4, 2, -2, 2);
  const Matrix logstd = random_matrix(rng, 4, 2, -25, 5);
  const Matrix noise = random_matrix(rng, 4, 2, -2, 2);
  Tape t;
  Var a = nn::sample_squashed(head, t.constant(mean), t.constant(logstd), t.constant(noise));
  EXPECT_EQ(a.value(), nn::sample_squashed(head, mean, logstd, noise));
}

TEST(SquashedGaussian, GradientMatchesFiniteDifference) {
  const auto head = unit_head(1);
  auto f = [&](Tape& t, const std::vector<Var>& in) {
    return ad::sum(nn::sample_squashed(head, in[0], in[1], t.constant(0.5)));
  };
  const auto r = nn::check_gradient(f, {Matrix(1, 1, 0.0), Matrix(1, 1, -1.0)});
  EXPECT_LT(r.rel_errors[0], 1e-5);
  EXPECT_LT(r.rel_errors[1], 1e-5);
  // Analytic: d/dm tanh(m + e^-1 * 0.5) at m = 0, scaled by the shrink.
  Tape t;
  Var m = t.variable(Matrix(1, 1, 0.0));
  t.backward(ad::sum(nn::sample_squashed(head, m, t.constant(-1.0), t.constant(0.5))));
  const double th = std::tanh(std::exp(-1.0) * 0.5);
  EXPECT_NEAR(m.grad()(0, 0), 1.0 - th * th, 1e-8);
}

TEST(SquashedGaussian, RandomGradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(8);
  nn::SquashedGaussianHead head{{-0.4, -1.5}, {0.4, 3.0}};
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix mean = random_matrix(rng, 3, 2, -1.5, 1.5);
    const Matrix logstd = random_matrix(rng, 3, 2, -3, 1.5);
    const Matrix noise = random_matrix(rng, 3, 2, -2, 2);
    auto f = [&](Tape& t, const std::vector<Var>& in) {
      return ad::sum(ad::square(nn::sample_squashed(head, in[0], in[1], t.constant(noise))));
    };
    EXPECT_LT(nn::check_gradient(f, {mean, logstd}).max_rel_error, 1e-5);
  }
}

TEST(Adam, MinimizesQuadratic) {
  Matrix x(1, 1, 1.0);
  auto state = nn::adam_init({&x});
  for (int step = 0; step < 100; ++step) {
    nn::adam_step({&x}, {Matrix(1, 1, 2.0 * x(0, 0))}, state, 0.1);
  }
  EXPECT_LT(std::abs(x(0, 0)), 0.05);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  // Bias correction makes the first step exactly lr * sign(g) up to eps.
  Matrix x(1, 2, std::vector<double>{1.0, -1.0});
  auto state = nn::adam_init({&x});
  nn::adam_step({&x}, {Matrix(1, 2, std::vector<double>{3.0, -0.5})}, state, 0.01);
  EXPECT_NEAR(x(0, 0), 0.99, 1e-9);
  EXPECT_NEAR(x(0, 1), -0.99, 1e-9);
}

TEST(Adam, ZeroLearningRateLeavesParametersBitwise) {
  std::mt19937_64 rng(9);
  Matrix x = random_matrix(rng, 3, 3, -1, 1);
  const Matrix before = x;
  auto state = nn::adam_init({&x});
  for (int i = 0; i < 5; ++i) {
    nn::adam_step({&x}, {random_matrix(rng, 3, 3, -1, 1)}, state, 0.0);
  }
  EXPECT_EQ(x, before);
}

TEST(Adam, ShapeMismatch) {
  Matrix x(2, 2);
  auto state = nn::adam_init({&x});
  EXPECT_THROW(nn::adam_step({&x}, {Matrix(1, 2)}, state, 0.1), Error);
}

TEST(CosineLr, EndpointsAndMidpoint) {
  EXPECT_DOUBLE_EQ(nn::cosine_lr(0, 100, 5e-5, 1e-6), 5e-5);
  EXPECT_DOUBLE_EQ(nn::cosine_lr(100, 100, 5e-5, 1e-6), 1e-6);
  EXPECT_NEAR(nn::cosine_lr(50, 100, 5e-5, 1e-6), (5e-5 + 1e-6) / 2, 1e-18);
  EXPECT_DOUBLE_EQ(nn::cosine_lr(500, 100, 5e-5, 1e-6), 1e-6);
  double prev = 1.0;
  for (long s = 0; s <= 100; ++s) {
    const double lr = nn::cosine_lr(s, 100, 5e-5, 1e-6);
    EXPECT_LE(lr, prev);
    prev = lr;
  }
}

TEST(Polyak, TauOneCopiesAndOtherwiseInterpolates) {
  std::mt19937_64 rng(10);
  MlpParams online = nn::make_mlp({2, 4, 1}, HiddenActivation::kGelu,
                                  OutputActivation::kLinear, rng);
  MlpParams target = nn::make_mlp({2, 4, 1}, HiddenActivation::kGelu,
                                  OutputActivation::kLinear, rng);
  const MlpParams original = target;
  nn::polyak_update(target, online, 0.25);
  for (std::size_t i = 0; i < target.weights[0].size(); ++i) {
    EXPECT_DOUBLE_EQ(target.weights[0].data[i],
                     0.25 * online.weights[0].data[i] + 0.75 * original.weights[0].data[i]);
  }
  nn::polyak_update(target, online, 1.0);
  EXPECT_EQ(target, online);
  EXPECT_THROW(nn::polyak_update(target, online, 0.0), Error);
  MlpParams other = nn::make_mlp({2, 3, 1}, HiddenActivation::kGelu,
                                 OutputActivation::kLinear, rng);
  EXPECT_THROW(nn::polyak_update(target, other, 0.5), Error);
}

TEST(Checkpoint, RoundTripIsExact) {
  std::mt19937_64 rng(11);
  nn::NamedNetworks nets = {
      {"policy", nn::make_mlp({11, 8, 4}, HiddenActivation::kGelu,
                              OutputActivation::kLinear, rng)},
      {"value", nn::make_mlp({11, 8, 1}, HiddenActivation::kTanh,
                             OutputActivation::kTanhSquash, rng)},
  };
  const std::string text = nn::checkpoint_to_string(nets);
  const auto back = nn::checkpoint_from_string(text);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].first, "policy");
  EXPECT_EQ(back[0].second, nets[0].second);
  EXPECT_EQ(back[1].second, nets[1].second);
  EXPECT_EQ(nn::checkpoint_to_string(back), text);

  const auto path = std::filesystem::temp_directory_path() / "mgsmooth_ckpt_test.json";
  nn::save_checkpoint(path.string(), nets);
  EXPECT_EQ(nn::load_checkpoint(path.string())[1].second, nets[1].second);
  std::filesystem::remove(path);
}

TEST(Checkpoint, LoaderValidatesShapes) {
  std::mt19937_64 rng(12);
  nn::NamedNetworks nets = {{"v", nn::make_mlp({2, 3, 1}, HiddenActivation::kGelu,
                                               OutputActivation::kLinear, rng)}};
  std::string text = nn::checkpoint_to_string(nets);
  const auto pos = text.find("\"sizes\"");
  ASSERT_NE(pos, std::string::npos);
  std::string broken = text;
  broken.replace(text.find('3', pos), 1, "4");  // hidden width no longer matches w0
  EXPECT_THROW(nn::checkpoint_from_string(broken), Error);
  EXPECT_THROW(nn::checkpoint_from_string("{not json"), Error);
  EXPECT_THROW(nn::load_checkpoint("/nonexistent/dir/x.json"), Error);
}

}  // namespace
}  // namespace mgsmooth
