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

#ifndef MGSMOOTH_DENSE_H_
#define MGSMOOTH_DENSE_H_

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace mgsmooth {

// Row-major dense real matrix. Used for payoff matrices, network weights and
// batched activations alike.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}
  Matrix(int r, int c, std::vector<double> values)
      : rows(r), cols(c), data(std::move(values)) {
    assert(data.size() == static_cast<std::size_t>(r) * c);
  }

  double& operator()(int r, int c) { return data[index(r, c)]; }
  double operator()(int r, int c) const { return data[index(r, c)]; }

  std::span<double> row(int r) {
    return {data.data() + static_cast<std::size_t>(r) * cols,
            static_cast<std::size_t>(cols)};
  }
  std::span<const double> row(int r) const {
    return {data.data() + static_cast<std::size_t>(r) * cols,
            static_cast<std::size_t>(cols)};
  }

  std::size_t size() const { return data.size(); }
  bool same_shape(const Matrix& o) const {
    return rows == o.rows && cols == o.cols;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t index(int r, int c) const {
    assert(r >= 0 && r < rows && c >= 0 && c < cols);
    return static_cast<std::size_t>(r) * cols + c;
  }
};

}  // namespace mgsmooth

#endif  // MGSMOOTH_DENSE_H_
