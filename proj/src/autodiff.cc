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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "mgsmooth/error.h"

namespace mgsmooth::ad {
namespace {

constexpr double kGeluK = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluC = 0.044715;
constexpr long kParallelMatmulWork = 1L << 15;

std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows) + "x" + std::to_string(m.cols);
}

int broadcast_dim(int x, int y, const Matrix& a, const Matrix& b) {
  if (x == y || y == 1) return x;
  if (x == 1) return y;
  throw Error(ErrorCode::kShapeMismatch,
              "cannot broadcast " + shape_str(a) + " with " + shape_str(b));
}

Tape* same_tape(Var a, Var b) {
  if (a.tape() == nullptr || a.tape() != b.tape()) {
    throw Error(ErrorCode::kInvalidArgument, "operands live on different tapes");
  }
  return a.tape();
}

template <class F>
Matrix map_values(const Matrix& x, F f) {
  Matrix y(x.rows, x.cols);
  for (std::size_t i = 0; i < x.size(); ++i) y.data[i] = f(x.data[i]);
  return y;
}

Var unary(Op op, Var a, Matrix value) {
  Tape::Node n;
  n.op = op;
  n.a = a.id();
  n.value = std::move(value);
  n.needs_grad = a.tape()->node(a.id()).needs_grad;
  return a.tape()->push(std::move(n));
}

template <class F>
Var binary_elementwise(Op op, Var a, Var b, F f) {
  Tape* t = same_tape(a, b);
  const Matrix& x = a.value();
  const Matrix& y = b.value();
  const int r = broadcast_dim(x.rows, y.rows, x, y);
  const int c = broadcast_dim(x.cols, y.cols, x, y);
  Matrix out(r, c);
  for (int i = 0; i < r; ++i) {
    const int xi = x.rows == 1 ? 0 : i;
    const int yi = y.rows == 1 ? 0 : i;
    for (int j = 0; j < c; ++j) {
      out(i, j) = f(x(xi, x.cols == 1 ? 0 : j), y(yi, y.cols == 1 ? 0 : j));
    }
  }
  Tape::Node n;
  n.op = op;
  n.a = a.id();
  n.b = b.id();
  n.value = std::move(out);
  n.needs_grad = t->node(a.id()).needs_grad || t->node(b.id()).needs_grad;
  return t->push(std::move(n));
}

// Adds src (shape of the broadcast output) into dst, summing over the
// dimensions along which dst was broadcast.
void accumulate_reduced(Matrix& dst, const Matrix& src) {
  for (int i = 0; i < src.rows; ++i) {
    const int di = dst.rows == 1 ? 0 : i;
    for (int j = 0; j < src.cols; ++j) {
      dst(di, dst.cols == 1 ? 0 : j) += src(i, j);
    }
  }
}

}  // namespace

const Matrix& Var::value() const { return tape_->value(id_); }
const Matrix& Var::grad() const { return tape_->grad(id_); }

double Var::item() const {
  const Matrix& v = value();
  if (v.rows != 1 || v.cols != 1) {
    throw Error(ErrorCode::kShapeMismatch, "item() on " + shape_str(v));
  }
  return v.data[0];
}

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::variable(Matrix value) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = true;
  return push(std::move(n));
}

Var Tape::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Matrix& Tape::grad_of(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.grad.size() == 0 && n.value.size() != 0) {
    n.grad = Matrix(n.value.rows, n.value.cols);
  }
  return n.grad;
}

void Tape::backward(Var root) {
  if (root.tape() != this) {
    throw Error(ErrorCode::kInvalidArgument, "root is not on this tape");
  }
  const Matrix& v = value(root.id());
  if (v.rows != 1 || v.cols != 1) {
    throw Error(ErrorCode::kShapeMismatch, "backward needs a 1x1 root");
  }
  for (Node& n : nodes_) n.grad = Matrix();
  grad_of(root.id()).data[0] = 1.0;
  for (int id = root.id(); id >= 0; --id) {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.needs_grad || n.grad.size() == 0 || n.op == Op::kLeaf) continue;
    backward_node(n);
  }
}

void Tape::backward_node(const Node& n) {
  const Matrix& g = n.grad;
  const Matrix& y = n.value;
  auto wants = [&](int id) { return id >= 0 && nodes_[static_cast<std::size_t>(id)].needs_grad; };
  auto input = [&](int id) -> const Matrix& { return nodes_[static_cast<std::size_t>(id)].value; };

  // Elementwise unary rules: d input += g * f'(x, y).
  auto unary_rule = [&](auto deriv) {
    if (!wants(n.a)) return;
    const Matrix& x = input(n.a);
    Matrix& ga = grad_of(n.a);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga.data[i] += g.data[i] * deriv(x.data[i], y.data[i]);
    }
  };

  switch (n.op) {
    case Op::kLeaf:
      break;
    case Op::kAdd:
    case Op::kSub: {
      if (wants(n.a)) accumulate_reduced(grad_of(n.a), g);
      if (wants(n.b)) {
        if (n.op == Op::kAdd) {
          accumulate_reduced(grad_of(n.b), g);
        } else {
          accumulate_reduced(grad_of(n.b), map_values(g, [](double v) { return -v; }));
        }
      }
      break;
    }
    case Op::kMul:
    case Op::kDiv: {
      const Matrix& x = input(n.a);
      const Matrix& z = input(n.b);
      Matrix da(g.rows, g.cols), db(g.rows, g.cols);
      for (int i = 0; i < g.rows; ++i) {
        for (int j = 0; j < g.cols; ++j) {
          const double xv = x(x.rows == 1 ? 0 : i, x.cols == 1 ? 0 : j);
          const double zv = z(z.rows == 1 ? 0 : i, z.cols == 1 ? 0 : j);
          if (n.op == Op::kMul) {
            da(i, j) = g(i, j) * zv;
            db(i, j) = g(i, j) * xv;
          } else {
            da(i, j) = g(i, j) / zv;
            db(i, j) = -g(i, j) * xv / (zv * zv);
          }
        }
      }
      if (wants(n.a)) accumulate_reduced(grad_of(n.a), da);
      if (wants(n.b)) accumulate_reduced(grad_of(n.b), db);
      break;
    }
    case Op::kMatmul: {
      if (wants(n.a)) {
        Matrix d = matmul_nt(g, input(n.b));
        Matrix& ga = grad_of(n.a);
        for (std::size_t i = 0; i < d.size(); ++i) ga.data[i] += d.data[i];
      }
      if (wants(n.b)) {
        Matrix d = matmul_tn(input(n.a), g);
        Matrix& gb = grad_of(n.b);
        for (std::size_t i = 0; i < d.size(); ++i) gb.data[i] += d.data[i];
      }
      break;
    }
    case Op::kSum:
    case Op::kMean: {
      if (!wants(n.a)) break;
      Matrix& ga = grad_of(n.a);
      const double s = n.op == Op::kSum ? g.data[0]
                                        : g.data[0] / static_cast<double>(ga.size());
      for (double& v : ga.data) v += s;
      break;
    }
    case Op::kRowSum: {
      if (!wants(n.a)) break;
      Matrix& ga = grad_of(n.a);
      for (int i = 0; i < ga.rows; ++i) {
        for (int j = 0; j < ga.cols; ++j) ga(i, j) += g(i, 0);
      }
      break;
    }
    case Op::kExp:
      unary_rule([](double, double yv) { return yv; });
      break;
    case Op::kLog:
      unary_rule([](double xv, double) { return 1.0 / xv; });
      break;
    case Op::kTanh:
      unary_rule([](double, double yv) { return 1.0 - yv * yv; });
      break;
    case Op::kGelu:
      unary_rule([](double xv, double) { return gelu_derivative(xv); });
      break;
    case Op::kSquare:
      unary_rule([](double xv, double) { return 2.0 * xv; });
      break;
    case Op::kSin:
      unary_rule([](double xv, double) { return std::cos(xv); });
      break;
    case Op::kCos:
      unary_rule([](double xv, double) { return -std::sin(xv); });
      break;
    case Op::kAtan:
      unary_rule([](double xv, double) { return 1.0 / (1.0 + xv * xv); });
      break;
    case Op::kClamp: {
      const double lo = n.lo, hi = n.hi;
      unary_rule([lo, hi](double xv, double) {
        return xv < lo || xv > hi ? 0.0 : 1.0;
      });
      break;
    }
    case Op::kClampStraight:
      unary_rule([](double, double) { return 1.0; });
      break;
    case Op::kAffine: {
      if (!wants(n.a)) break;
      Matrix& ga = grad_of(n.a);
      for (int i = 0; i < g.rows; ++i) {
        for (int j = 0; j < g.cols; ++j) {
          const double s = n.scale.size() == 1 ? n.scale[0] : n.scale[static_cast<std::size_t>(j)];
          ga(i, j) += s * g(i, j);
        }
      }
      break;
    }
    case Op::kSliceCols: {
      if (!wants(n.a)) break;
      Matrix& ga = grad_of(n.a);
      for (int i = 0; i < g.rows; ++i) {
        for (int j = 0; j < g.cols; ++j) ga(i, n.begin + j) += g(i, j);
      }
      break;
    }
    case Op::kConcatCols: {
      int offset = 0;
      for (int id : n.inputs) {
        const int w = input(id).cols;
        if (wants(id)) {
          Matrix& gi = grad_of(id);
          for (int i = 0; i < g.rows; ++i) {
            for (int j = 0; j < w; ++j) gi(i, j) += g(i, offset + j);
          }
        }
        offset += w;
      }
      break;
    }
  }
}

double gelu_value(double x) {
  return 0.5 * x * (1.0 + std::tanh(kGeluK * (x + kGeluC * x * x * x)));
}

double gelu_derivative(double x) {
  const double t = std::tanh(kGeluK * (x + kGeluC * x * x * x));
  return 0.5 * (1.0 + t) +
         0.5 * x * (1.0 - t * t) * kGeluK * (1.0 + 3.0 * kGeluC * x * x);
}

Var add(Var a, Var b) {
  return binary_elementwise(Op::kAdd, a, b, [](double x, double y) { return x + y; });
}
Var sub(Var a, Var b) {
  return binary_elementwise(Op::kSub, a, b, [](double x, double y) { return x - y; });
}
Var mul(Var a, Var b) {
  return binary_elementwise(Op::kMul, a, b, [](double x, double y) { return x * y; });
}
Var div(Var a, Var b) {
  return binary_elementwise(Op::kDiv, a, b, [](double x, double y) { return x / y; });
}

Var matmul(Var a, Var b) {
  Tape* t = same_tape(a, b);
  if (a.cols() != b.rows()) {
    throw Error(ErrorCode::kShapeMismatch,
                "matmul " + shape_str(a.value()) + " by " + shape_str(b.value()));
  }
  Tape::Node n;
  n.op = Op::kMatmul;
  n.a = a.id();
  n.b = b.id();
  n.value = matmul_values(a.value(), b.value());
  n.needs_grad = t->node(a.id()).needs_grad || t->node(b.id()).needs_grad;
  return t->push(std::move(n));
}

Var sum(Var a) {
  double s = 0.0;
  for (double v : a.value().data) s += v;
  return unary(Op::kSum, a, Matrix(1, 1, s));
}

Var mean(Var a) {
  if (a.value().size() == 0) throw Error(ErrorCode::kEmptyInput, "mean of empty");
  double s = 0.0;
  for (double v : a.value().data) s += v;
  return unary(Op::kMean, a, Matrix(1, 1, s / static_cast<double>(a.value().size())));
}

Var row_sum(Var a) {
  const Matrix& x = a.value();
  Matrix out(x.rows, 1);
  for (int i = 0; i < x.rows; ++i) {
    double s = 0.0;
    for (double v : x.row(i)) s += v;
    out(i, 0) = s;
  }
  return unary(Op::kRowSum, a, std::move(out));
}

Var exp(Var a) {
  return unary(Op::kExp, a, map_values(a.value(), [](double x) { return std::exp(x); }));
}

Var log(Var a) {
  for (double v : a.value().data) {
    if (!(v > 0.0)) throw Error(ErrorCode::kLogOfNonPositive, "log of " + std::to_string(v));
  }
  return unary(Op::kLog, a, map_values(a.value(), [](double x) { return std::log(x); }));
}

Var tanh(Var a) {
  return unary(Op::kTanh, a, map_values(a.value(), [](double x) { return std::tanh(x); }));
}

Var gelu(Var a) { return unary(Op::kGelu, a, map_values(a.value(), gelu_value)); }

Var square(Var a) {
  return unary(Op::kSquare, a, map_values(a.value(), [](double x) { return x * x; }));
}

Var sin(Var a) {
  return unary(Op::kSin, a, map_values(a.value(), [](double x) { return std::sin(x); }));
}

Var cos(Var a) {
  return unary(Op::kCos, a, map_values(a.value(), [](double x) { return std::cos(x); }));
}

Var atan(Var a) {
  return unary(Op::kAtan, a, map_values(a.value(), [](double x) { return std::atan(x); }));
}

namespace {
Var clamp_impl(Op op, Var a, double lo, double hi) {
  if (!(lo <= hi)) throw Error(ErrorCode::kInvalidArgument, "clamp needs lo <= hi");
  Tape::Node n;
  n.op = op;
  n.a = a.id();
  n.value = map_values(a.value(), [lo, hi](double x) { return std::clamp(x, lo, hi); });
  n.needs_grad = a.tape()->node(a.id()).needs_grad;
  n.lo = lo;
  n.hi = hi;
  return a.tape()->push(std::move(n));
}
}  // namespace

Var clamp(Var a, double lo, double hi) { return clamp_impl(Op::kClamp, a, lo, hi); }

Var clamp_straight_through(Var a, double lo, double hi) {
  return clamp_impl(Op::kClampStraight, a, lo, hi);
}

Var affine(Var a, std::vector<double> scale, std::vector<double> shift) {
  const Matrix& x = a.value();
  auto ok = [&](const std::vector<double>& v) {
    return v.size() == 1 || v.size() == static_cast<std::size_t>(x.cols);
  };
  if (!ok(scale) || !ok(shift)) {
    throw Error(ErrorCode::kShapeMismatch, "affine parameters vs " + shape_str(x));
  }
  Matrix out(x.rows, x.cols);
  for (int i = 0; i < x.rows; ++i) {
    for (int j = 0; j < x.cols; ++j) {
      const double s = scale.size() == 1 ? scale[0] : scale[static_cast<std::size_t>(j)];
      const double b = shift.size() == 1 ? shift[0] : shift[static_cast<std::size_t>(j)];
      out(i, j) = s * x(i, j) + b;
    }
  }
  Tape::Node n;
  n.op = Op::kAffine;
  n.a = a.id();
  n.value = std::move(out);
  n.needs_grad = a.tape()->node(a.id()).needs_grad;
  n.scale = std::move(scale);
  n.shift = std::move(shift);
  return a.tape()->push(std::move(n));
}

Var slice_cols(Var a, int begin, int count) {
  const Matrix& x = a.value();
  if (begin < 0 || count < 0 || begin + count > x.cols) {
    throw Error(ErrorCode::kShapeMismatch, "slice out of range of " + shape_str(x));
  }
  Matrix out(x.rows, count);
  for (int i = 0; i < x.rows; ++i) {
    for (int j = 0; j < count; ++j) out(i, j) = x(i, begin + j);
  }
  Tape::Node n;
  n.op = Op::kSliceCols;
  n.a = a.id();
  n.begin = begin;
  n.value = std::move(out);
  n.needs_grad = a.tape()->node(a.id()).needs_grad;
  return a.tape()->push(std::move(n));
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw Error(ErrorCode::kEmptyInput, "concat of nothing");
  Tape* t = parts.front().tape();
  const int rows = parts.front().rows();
  int cols = 0;
  bool needs = false;
  for (const Var& p : parts) {
    same_tape(parts.front(), p);
    if (p.rows() != rows) throw Error(ErrorCode::kShapeMismatch, "concat row count");
    cols += p.cols();
    needs = needs || t->node(p.id()).needs_grad;
  }
  Matrix out(rows, cols);
  int offset = 0;
  Tape::Node n;
  for (const Var& p : parts) {
    const Matrix& x = p.value();
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < x.cols; ++j) out(i, offset + j) = x(i, j);
    }
    offset += x.cols;
    n.inputs.push_back(p.id());
  }
  n.op = Op::kConcatCols;
  n.value = std::move(out);
  n.needs_grad = needs;
  return t->push(std::move(n));
}

Var operator+(Var a, Var b) { return add(a, b); }
Var operator-(Var a, Var b) { return sub(a, b); }
Var operator*(Var a, Var b) { return mul(a, b); }
Var operator/(Var a, Var b) { return div(a, b); }
Var operator-(Var a) { return affine(a, {-1.0}, {0.0}); }
Var operator+(Var a, double c) { return affine(a, {1.0}, {c}); }
Var operator+(double c, Var a) { return affine(a, {1.0}, {c}); }
Var operator-(Var a, double c) { return affine(a, {1.0}, {-c}); }
Var operator-(double c, Var a) { return affine(a, {-1.0}, {c}); }
Var operator*(Var a, double c) { return affine(a, {c}, {0.0}); }
Var operator*(double c, Var a) { return affine(a, {c}, {0.0}); }
Var operator/(Var a, double c) { return affine(a, {1.0 / c}, {0.0}); }
Var operator/(double c, Var a) { return div(a.tape()->constant(c), a); }

namespace {
void matmul_row(const Matrix& a, const Matrix& b, Matrix& c, int i) {
  double* out = c.data.data() + static_cast<std::size_t>(i) * c.cols;
  for (int k = 0; k < a.cols; ++k) {
    const double aik = a(i, k);
    const double* brow = b.data.data() + static_cast<std::size_t>(k) * b.cols;
    for (int j = 0; j < b.cols; ++j) out[j] += aik * brow[j];
  }
}

void check_matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) {
    throw Error(ErrorCode::kShapeMismatch,
                "matmul " + shape_str(a) + " by " + shape_str(b));
  }
}
}  // namespace

Matrix matmul_values(const Matrix& a, const Matrix& b) {
  check_matmul(a, b);
  Matrix c(a.rows, b.cols);
  const long work = static_cast<long>(a.rows) * a.cols * b.cols;
#pragma omp parallel for schedule(static) if (work >= kParallelMatmulWork)
  for (int i = 0; i < a.rows; ++i) matmul_row(a, b, c, i);
  return c;
}

Matrix matmul_values_serial(const Matrix& a, const Matrix& b) {
  check_matmul(a, b);
  Matrix c(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i) matmul_row(a, b, c, i);
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows) throw Error(ErrorCode::kShapeMismatch, "matmul_tn");
  Matrix c(a.cols, b.cols);
  for (int k = 0; k < a.rows; ++k) {
    for (int i = 0; i < a.cols; ++i) {
      const double aki = a(k, i);
      for (int j = 0; j < b.cols; ++j) c(i, j) += aki * b(k, j);
    }
  }
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols != b.cols) throw Error(ErrorCode::kShapeMismatch, "matmul_nt");
  Matrix c(a.rows, b.rows);
  for (int i = 0; i < a.rows; ++i) {
    for (int j = 0; j < b.rows; ++j) {
      double s = 0.0;
      for (int k = 0; k < a.cols; ++k) s += a(i, k) * b(j, k);
      c(i, j) = s;
    }
  }
  return c;
}

}  // namespace mgsmooth::ad
