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

#ifndef CTMP_TESTS_TEST_PROBLEMS_HPP
#define CTMP_TESTS_TEST_PROBLEMS_HPP

#include <cmath>

#include "ctmp/problem.hpp"

namespace ctmp::testing {

// Rows: 0 y_max (x+u <= 1), 1 y_min (-x-u <= 1), 2 u_max (u <= 2).
inline LtiOcProblem scalar_output_bounds() {
  LtiOcProblem p;
  p.A = Matrix::Zero(1, 1);
  p.B = Matrix::Constant(1, 1, -1.0);
  p.Q = Matrix::Identity(1, 1);
  p.R = Matrix::Identity(1, 1);
  p.P = Matrix::Identity(1, 1);
  p.Gx = Matrix(3, 1);
  p.Gx << 1, -1, 0;
  p.Gu = Matrix(3, 1);
  p.Gu << 1, -1, 1;
  p.b = Vector(3);
  p.b << 1, 1, 2;
  p.T = 2.0;
  p.theta_box = {Vector::Constant(1, -2.0), Vector::Constant(1, 2.0)};
  p.row_names = {"y_max", "y_min", "u_max"};
  return p;
}

inline constexpr int kYmax = 0;
inline constexpr int kYmin = 1;
inline constexpr int kUmax = 2;

// Rows: 0 y1 (-x1+x2+u <= 1.2), 1 y2 (x1-x2-u <= 2).
inline LtiOcProblem coupled_two_state() {
  LtiOcProblem p;
  p.A = Matrix(2, 2);
  p.A << 0, -1, -1, 0;
  p.B = Matrix(2, 1);
  p.B << 1, 0;
  p.Q = Matrix::Identity(2, 2);
  p.R = Matrix::Identity(1, 1);
  p.P = Matrix::Identity(2, 2);
  p.Gx = Matrix(2, 2);
  p.Gx << -1, 1, 1, -1;
  p.Gu = Matrix(2, 1);
  p.Gu << 1, -1;
  p.b = Vector(2);
  p.b << 1.2, 2.0;
  p.T = 2.0;
  p.theta_box = {Vector::Constant(2, -2.0), Vector::Constant(2, 2.0)};
  p.row_names = {"y1", "y2"};
  return p;
}

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// Closed-form data for the scalar problem.
inline double exit_time(double x0) { return std::log(1.0 / (2.0 * (x0 + 1.0))); }
inline const double kInfeasibleEdge = -1.0 - 2.0 * std::exp(-2.0);
inline const double kLowerTwoArcEdge = -1.0 + 0.5 * std::exp(-2.0);

}  // namespace ctmp::testing

#endif  // CTMP_TESTS_TEST_PROBLEMS_HPP
