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

#ifndef CTMP_QP_HPP
#define CTMP_QP_HPP

#include <vector>

#include "ctmp/problem.hpp"

namespace ctmp {

// Strictly convex QP
//
//   min 1/2 x'Hx + f'x   s.t.  Aeq x = beq,  Ain x <= bin.
struct QpProblem {
  Matrix H;
  Vector f;
  Matrix Aeq;
  Vector beq;
  Matrix Ain;
  Vector bin;
};

struct QpOptions {
  double feas_tol = 1e-10;  // relative to max(1, |bin|)
  double active_tol = 1e-9;  // multiplier threshold for strict activity
  int max_iter = 0;          // 0: 10 * (n + rows)
};

struct QpResult {
  Vector x;
  Vector lambda_eq;
  Vector lambda_in;         // >= 0, zero on inactive rows
  std::vector<int> active;  // rows of Ain with lambda > active_tol
  std::vector<int> weak;    // rows in the working set with lambda <= tol
  double objective = 0.0;
  int iterations = 0;

  // max of stationarity, primal infeasibility and complementarity.
  double kkt_residual(const QpProblem& qp) const;
};

// Dual active-set method. Throws InfeasibleError with the row that could not
// be added (-1 for an equality), Error(kSingularKkt) if H is not positive
// definite, Error(kNoConvergence) on cycling.
QpResult solve_qp(const QpProblem& qp, const QpOptions& options = {});

}  // namespace ctmp

#endif  // CTMP_QP_HPP
