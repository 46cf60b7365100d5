// Copyright 2026 The ctmp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CTMP_PROBLEM_HPP
#define CTMP_PROBLEM_HPP

#include <Eigen/Dense>
#include <compare>
#include <string>
#include <vector>

namespace ctmp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Axis-aligned parameter domain. Parameters are initial states.
struct ParameterBox {
  Vector lo;
  Vector hi;

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const Vector& theta, double tol = 0.0) const;
  double diameter() const { return (hi - lo).norm(); }
};

// Linear time-invariant optimal control problem
//
//   min  1/2 x(T)' P x(T) + 1/2 int_0^T (x'Qx + u'Ru) dt
//   s.t. xdot = A x + B u,  Gx x + Gu u - b <= 0 on [0, T],  x(0) = theta.
//
// Two-sided bounds are stored as two rows.
struct LtiOcProblem {
  Matrix A, B, Q, R, P;
  Matrix Gx, Gu;
  Vector b;
  double T = 0.0;
  ParameterBox theta_box;
  // Optional display names for constraint rows ("y_min", ...).
  std::vector<std::string> row_names;

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  int c() const { return static_cast<int>(b.size()); }

  // Throws Error(kInvalidProblem) naming the first violated invariant.
  void validate() const;

  std::string row_name(int row) const;

  // g = Gx x + Gu u - b.
  Vector constraint_values(const Vector& x, const Vector& u) const;
  double constraint_value(int row, const Vector& x, const Vector& u) const;

  // L = 1/2 (x'Qx + u'Ru).
  double running_cost(const Vector& x, const Vector& u) const;
};

// Sorted, duplicate-free set of active constraint rows.
class ActiveSet {
 public:
  ActiveSet() = default;
  explicit ActiveSet(std::vector<int> indices);
  ActiveSet(std::initializer_list<int> indices)
      : ActiveSet(std::vector<int>(indices)) {}

  const std::vector<int>& indices() const { return indices_; }
  int size() const { return static_cast<int>(indices_.size()); }
  bool empty() const { return indices_.empty(); }
  bool contains(int row) const;
  int position(int row) const;  // -1 when absent

  ActiveSet with(int row) const;
  ActiveSet without(int row) const;

  std::string to_string() const;

  auto operator<=>(const ActiveSet&) const = default;

 private:
  std::vector<int> indices_;
};

}  // namespace ctmp

#endif  // CTMP_PROBLEM_HPP
