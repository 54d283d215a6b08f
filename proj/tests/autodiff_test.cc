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


#include "mgsmooth/autodiff.h"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>
#include <string>

#include "mgsmooth/error.h"
#include "mgsmooth/nn.h"

namespace mgsmooth {
namespace {

using ad::Tape;
using ad::Var;
using nn::check_gradient;

Matrix random_matrix(std::mt19937_64& rng, int r, int c, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  Matrix m(r, c);
  for (double& v : m.data) v = d(rng);
  return m;
}

// Values bounded away from the clamp kinks at lo and hi.
Matrix away_from(std::mt19937_64& rng, int r, int c, double lo, double hi) {
  Matrix m = random_matrix(rng, r, c, lo - 1.0, hi + 1.0);
  for (double& v : m.data) {
    if (std::abs(v - lo) < 0.05 || std::abs(v - hi) < 0.05) v += 0.2;
  }
  return m;
}

TEST(Autodiff, SquareDerivative) {
  Tape t;
  Var x = t.variable(Matrix(1, 1, 3.0));
  t.backward(ad::sum(ad::square(x)));
  EXPECT_DOUBLE_EQ(x.grad()(0, 0), 6.0);
}

TEST(Autodiff, TanhDerivativeAtZero) {
  Tape t;
  Var x = t.variable(Matrix(1, 1, 0.0));
  t.backward(ad::sum(ad::tanh(x)));
  EXPECT_DOUBLE_EQ(x.grad()(0, 0), 1.0);
}

TEST(Autodiff, ForwardValues) {
  Tape t;
  Var a = t.constant(Matrix(1, 2, std::vector<double>{1.0, 2.0}));
  Var b = t.constant(Matrix(2, 1, std::vector<double>{3.0, 4.0}));
  EXPECT_DOUBLE_EQ(ad::matmul(a, b).item(), 11.0);
  Var c = a + b;  // broadcasts to 2x2
  EXPECT_EQ(c.rows(), 2);
  EXPECT_EQ(c.cols(), 2);
  EXPECT_DOUBLE_EQ(c.value()(1, 0), 5.0);
  EXPECT_DOUBLE_EQ(ad::mean(a).item(), 1.5);
  EXPECT_DOUBLE_EQ(ad::row_sum(c).value()(1, 0), 11.0);
  EXPECT_DOUBLE_EQ(ad::gelu(t.constant(0.0)).item(), 0.0);
  EXPECT_NEAR(ad::gelu(t.constant(1.0)).item(), 0.8411919906082768, 1e-15);
  EXPECT_DOUBLE_EQ(ad::clamp(t.constant(5.0), -1.0, 2.0).item(), 2.0);
  EXPECT_DOUBLE_EQ(ad::slice_cols(a, 1, 1).item(), 2.0);
  EXPECT_EQ(ad::concat_cols({a, a}).cols(), 4);
}

TEST(Autodiff, Errors) {
  Tape t;
  Var a = t.variable(Matrix(2, 3));
  Var b = t.variable(Matrix(3, 2));
  EXPECT_THROW(a + b, Error);
  EXPECT_THROW(ad::matmul(a, a), Error);
  EXPECT_THROW(ad::log(t.constant(0.0)), Error);
  EXPECT_THROW(ad::log(t.constant(-1.0)), Error);
  EXPECT_THROW(t.backward(a), Error);
  EXPECT_THROW(ad::slice_cols(a, 2, 2), Error);
  try {
    ad::log(t.constant(0.0));
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLogOfNonPositive);
  }
  try {
    (void)(a * b);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
}

struct UnaryCase {
  std::string name;
  std::function<Var(Var)> op;
  std::function<Matrix(std::mt19937_64&, int, int)> sample;
};

std::vector<UnaryCase> unary_cases() {
  auto uniform = [](double lo, double hi) {
    return [lo, hi](std::mt19937_64& rng, int r, int c) {
      return random_matrix(rng, r, c, lo, hi);
    };
  };
  return {
      {"exp", [](Var x) { return ad::exp(x); }, uniform(-2, 2)},
      {"log", [](Var x) { return ad::log(x); }, uniform(0.2, 3)},
      {"tanh", [](Var x) { return ad::tanh(x); }, uniform(-3, 3)},
      {"gelu", [](Var x) { return ad::gelu(x); }, uniform(-4, 4)},
      {"square", [](Var x) { return ad::square(x); }, uniform(-3, 3)},
      {"sin", [](Var x) { return ad::sin(x); }, uniform(-4, 4)},
      {"cos", [](Var x) { return ad::cos(x); }, uniform(-4, 4)},
      {"atan", [](Var x) { return ad::atan(x); }, uniform(-4, 4)},
      {"clamp", [](Var x) { return ad::clamp(x, -0.5, 0.7); },
       [](std::mt19937_64& rng, int r, int c) { return away_from(rng, r, c, -0.5, 0.7); }},
      {"affine", [](Var x) { return ad::affine(x, {1.5}, {-0.25}); }, uniform(-2, 2)},
      {"neg", [](Var x) { return -x; }, uniform(-2, 2)},
      {"sum", [](Var x) { return ad::sum(x); }, uniform(-2, 2)},
      {"mean", [](Var x) { return ad::mean(x); }, uniform(-2, 2)},
      {"row_sum", [](Var x) { return ad::row_sum(x); }, uniform(-2, 2)},
  };
}

TEST(Autodiff, UnaryPrimitivesMatchFiniteDifferences) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> dim(1, 5);
  for (const UnaryCase& c : unary_cases()) {
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const int r = dim(rng), k = dim(rng);
      const Matrix x = c.sample(rng, r, k);
      Tape probe;
      const Var shape = c.op(probe.constant(x));
      const Matrix w = random_matrix(rng, shape.rows(), shape.cols(), -1, 1);
      auto f = [&](Tape& t, const std::vector<Var>& in) {
        return ad::sum(c.op(in[0]) * t.constant(w));
      };
      worst = std::max(worst, check_gradient(f, {x}).max_rel_error);
    }
    EXPECT_LT(worst, 1e-5) << c.name;
  }
}

TEST(Autodiff, StraightThroughClampPassesGradient) {
  Tape t;
  Var x = t.variable(Matrix(1, 3, std::vector<double>{-5.0, 0.0, 5.0}));
  t.backward(ad::sum(ad::clamp_straight_through(x, -1.0, 1.0)));
  for (double g : x.grad().data) EXPECT_EQ(g, 1.0);
  Tape u;
  Var y = u.variable(Matrix(1, 3, std::vector<double>{-5.0, 0.0, 5.0}));
  u.backward(ad::sum(ad::clamp(y, -1.0, 1.0)));
  EXPECT_EQ(y.grad()(0, 0), 0.0);
  EXPECT_EQ(y.grad()(0, 1), 1.0);
  EXPECT_EQ(y.grad()(0, 2), 0.0);
}

TEST(Autodiff, BinaryPrimitivesWithBroadcastingMatchFiniteDifferences) {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> dim(1, 4);
  std::uniform_int_distribution<int> pattern(0, 4);
  using BinOp = std::function<Var(Var, Var)>;
  const std::vector<std::pair<std::string, BinOp>> ops = {
      {"add", [](Var a, Var b) { return a + b; }},
      {"sub", [](Var a, Var b) { return a - b; }},
      {"mul", [](Var a, Var b) { return a * b; }},
      {"div", [](Var a, Var b) { return a / b; }},
  };
  for (const auto& [name, op] : ops) {
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const int r = dim(rng), c = dim(rng);
      int br = r, bc = c;
      switch (pattern(rng)) {
        case 1: br = 1; break;
        case 2: bc = 1; break;
        case 3: br = 1; bc = 1; break;
        default: break;
      }
      const Matrix a = random_matrix(rng, r, c, -2, 2);
      Matrix b = random_matrix(rng, br, bc, 0.5, 2);  // away from zero for div
      if (trial % 2 == 1) {
        for (double& v : b.data) v = -v;
      }
      const Matrix w = random_matrix(rng, r, c, -1, 1);
      auto f = [&](Tape& t, const std::vector<Var>& in) {
        return ad::sum(op(in[0], in[1]) * t.constant(w));
      };
      // Alternate operand order so the left side broadcasts too.
      if (trial % 3 == 0 && name != "div") {
        auto g = [&](Tape& t, const std::vector<Var>& in) {
          return ad::sum(op(in[1], in[0]) * t.constant(w));
        };
        worst = std::max(worst, check_gradient(g, {a, b}).max_rel_error);
      } else {
        worst = std::max(worst, check_gradient(f, {a, b}).max_rel_error);
      }
    }
    EXPECT_LT(worst, 1e-5) << name;
  }
}

TEST(Autodiff, MatmulSliceConcatMatchFiniteDifferences) {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> dim(1, 5);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = dim(rng), k = dim(rng), m = dim(rng) + 1;
    const Matrix a = random_matrix(rng, n, k, -1, 1);
    const Matrix b = random_matrix(rng, k, m, -1, 1);
    const Matrix w = random_matrix(rng, n, m + 1, -1, 1);
    auto f = [&](Tape& t, const std::vector<Var>& in) {
      Var c = ad::matmul(in[0], in[1]);
      Var parts = ad::concat_cols({ad::slice_cols(c, 1, m - 1), ad::slice_cols(c, 0, 2)});
      return ad::sum(parts * t.constant(w));
    };
    worst = std::max(worst, check_gradient(f, {a, b}).max_rel_error);
  }
  EXPECT_LT(worst, 1e-5);
}

TEST(Autodiff, RandomCompositeMatchesFiniteDifferences) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix x = random_matrix(rng, 3, 4, -1, 1);
    const Matrix w = random_matrix(rng, 4, 2, -1, 1);
    auto f = [](Tape&, const std::vector<Var>& in) {
      Var h = ad::tanh(ad::matmul(in[0], in[1]));
      Var e = ad::exp(h) * ad::sin(h);
      return ad::mean(ad::square(e) + ad::gelu(h));
    };
    EXPECT_LT(check_gradient(f, {x, w}).max_rel_error, 1e-5);
  }
}

TEST(Autodiff, BackwardLeavesValuesUnchanged) {
  std::mt19937_64 rng(15);
  Tape t;
  Var x = t.variable(random_matrix(rng, 4, 3, -1, 1));
  Var w = t.variable(random_matrix(rng, 3, 2, -1, 1));
  Var y = ad::sum(ad::gelu(ad::matmul(x, w)) * 2.0);
  std::vector<Matrix> before;
  for (std::size_t i = 0; i < t.size(); ++i) before.push_back(t.value(static_cast<int>(i)));
  t.backward(y);
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(t.value(static_cast<int>(i)), before[i]);
  }
  // A second backward gives the same gradients, not doubled ones.
  const Matrix g1 = x.grad();
  t.backward(y);
  EXPECT_EQ(x.grad(), g1);
}

TEST(Autodiff, ConstantsReceiveNoGradient) {
  Tape t;
  Var c = t.constant(Matrix(1, 1, 2.0));
  Var x = t.variable(Matrix(1, 1, 3.0));
  t.backward(ad::sum(c * x));
  EXPECT_EQ(c.grad().size(), 0u);
  EXPECT_DOUBLE_EQ(x.grad()(0, 0), 2.0);
}

TEST(Matmul, ParallelMatchesSerialBitwise) {
  std::mt19937_64 rng(16);
  const Matrix a = random_matrix(rng, 300, 70, -1, 1);
  const Matrix b = random_matrix(rng, 70, 90, -1, 1);
  EXPECT_EQ(ad::matmul_values(a, b), ad::matmul_values_serial(a, b));
}

TEST(Matmul, TransposedVariantsMatchNaive) {
  std::mt19937_64 rng(17);
  const Matrix a = random_matrix(rng, 5, 3, -1, 1);
  const Matrix b = random_matrix(rng, 5, 4, -1, 1);
  const Matrix tn = ad::matmul_tn(a, b);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 4; ++j) {
      double s = 0.0;
      for (int k = 0; k < 5; ++k) s += a(k, i) * b(k, j);
      EXPECT_NEAR(tn(i, j), s, 1e-14);
    }
  }
  const Matrix c = random_matrix(rng, 2, 3, -1, 1);
  const Matrix nt = ad::matmul_nt(c, a);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 5; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += c(i, k) * a(j, k);
      EXPECT_NEAR(nt(i, j), s, 1e-14);
    }
  }
}

}  // namespace
}  // namespace mgsmooth
