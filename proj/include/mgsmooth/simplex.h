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

#ifndef MGSMOOTH_SIMPLEX_H_
#define MGSMOOTH_SIMPLEX_H_

#include <vector>

#include "mgsmooth/dense.h"

namespace mgsmooth::lp {

enum class Sense { kLessEqual, kGreaterEqual, kEqual };
enum class Status { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

// optimize c.x  s.t.  A x (sense) b,  x >= 0.
struct Problem {
  std::vector<double> objective;
  Matrix constraints;
  std::vector<Sense> senses;
  std::vector<double> rhs;
  bool maximize = true;
};

struct Solution {
  Status status = Status::kIterationLimit;
  std::vector<double> x;
  double objective = 0.0;
  int pivots = 0;
};

// Dense two-phase simplex with Bland's rule, so it cannot cycle and always
// returns the same basis for the same input.
Solution solve(const Problem& problem);

}  // namespace mgsmooth::lp

#endif  // MGSMOOTH_SIMPLEX_H_
