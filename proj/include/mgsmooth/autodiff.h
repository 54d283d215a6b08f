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

#ifndef MGSMOOTH_AUTODIFF_H_
#define MGSMOOTH_AUTODIFF_H_

#include <cstddef>
#include <vector>

#include "mgsmooth/dense.h"

namespace mgsmooth::ad {

enum class Op {
  kLeaf,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kMatmul,
  kSum,
  kMean,
  kRowSum,
  kExp,
  kLog,
  kTanh,
  kGelu,
  kSquare,
  kSin,
  kCos,
  kAtan,
  kClamp,          // true gradient: zero outside [lo, hi]
  kClampStraight,  // gradient passes through unchanged
  kAffine,         // per-column y = scale * x + shift
  kSliceCols,
  kConcatCols,
};

class Tape;

// Handle to a tape node. Cheap to copy; only valid while its tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  const Matrix& value() const;
  const Matrix& grad() const;
  int rows() const { return value().rows; }
  int cols() const { return value().cols; }
  // Value of a 1x1 node.
  double item() const;

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Append-only record of primitive operations. Nodes are stored in creation
// order, which is a topological order; backward walks it once in reverse.
class Tape {
 public:
  struct Node {
    Op op = Op::kLeaf;
    int a = -1;
    int b = -1;
    std::vector<int> inputs;  // concat only
    Matrix value;
    Matrix grad;  // allocated by backward for nodes that need it
    bool needs_grad = false;
    double lo = 0.0;
    double hi = 0.0;
    int begin = 0;
    std::vector<double> scale;
    std::vector<double> shift;
  };

  // Leaf whose gradient is wanted.
  Var variable(Matrix value);
  // Leaf treated as data.
  Var constant(Matrix value);
  Var constant(double value) { return constant(Matrix(1, 1, value)); }

  // Seeds d(root)/d(root) = 1 for a 1x1 root and accumulates adjoints into
  // every node that depends on a variable. Forward values are not touched.
  // Throws kShapeMismatch if root is not 1x1.
  void backward(Var root);

  const Matrix& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  // Zero-shaped if the node received no gradient.
  const Matrix& grad(int id) const { return nodes_[static_cast<std::size_t>(id)].grad; }
  std::size_t size() const { return nodes_.size(); }
  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }

  Var push(Node node);

 private:
  void backward_node(const Node& n);
  Matrix& grad_of(int id);

  std::vector<Node> nodes_;
};

// Elementwise binary ops broadcast along any dimension of size 1.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);
Var matmul(Var a, Var b);
Var sum(Var a);      // all entries -> 1x1
Var mean(Var a);     // all entries -> 1x1
Var row_sum(Var a);  // per row -> rows x 1
Var exp(Var a);
Var log(Var a);  // throws kLogOfNonPositive
Var tanh(Var a);
Var gelu(Var a);
Var square(Var a);
Var sin(Var a);
Var cos(Var a);
Var atan(Var a);
Var clamp(Var a, double lo, double hi);
Var clamp_straight_through(Var a, double lo, double hi);
// scale and shift have length 1 (applied to all columns) or cols.
Var affine(Var a, std::vector<double> scale, std::vector<double> shift);
Var slice_cols(Var a, int begin, int count);
Var concat_cols(const std::vector<Var>& parts);

Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator/(Var a, Var b);
Var operator-(Var a);
Var operator+(Var a, double c);
Var operator+(double c, Var a);
Var operator-(Var a, double c);
Var operator-(double c, Var a);
Var operator*(Var a, double c);
Var operator*(double c, Var a);
Var operator/(Var a, double c);
Var operator/(double c, Var a);

// Plain-value kernels shared by the tape and the no-tape fast path.
double gelu_value(double x);
double gelu_derivative(double x);

// C = A * B. The parallel version splits rows over OpenMP threads; every
// output entry is accumulated in the same order as the serial reference, so
// results are bitwise identical.
Matrix matmul_values(const Matrix& a, const Matrix& b);
Matrix matmul_values_serial(const Matrix& a, const Matrix& b);
// A^T * B and A * B^T without materializing transposes.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
Matrix matmul_nt(const Matrix& a, const Matrix& b);

}  // namespace mgsmooth::ad

#endif  // MGSMOOTH_AUTODIFF_H_
