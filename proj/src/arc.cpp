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

#include "ctmp/arc.hpp"

#include "ctmp/error.hpp"
#include "ctmp/matrix_exp.hpp"

namespace ctmp {

ArcDynamics assemble_arc_system(const LtiOcProblem& problem,
                                const ActiveSet& active) {
  const int n = problem.n(), m = problem.m(), c = problem.c();
  const int k = active.size();
  for (int row : active.indices()) {
    if (row < 0 || row >= c) {
      throw Error(ErrorCode::kInvalidProblem,
                  "active row " + std::to_string(row) + " out of range");
    }
  }

  Matrix GxA(k, n), GuA(k, m);
  Vector bA(k);
  for (int j = 0; j < k; ++j) {
    const int row = active.indices()[j];
    GxA.row(j) = problem.Gx.row(row);
    GuA.row(j) = problem.Gu.row(row);
    bA(j) = problem.b(row);
  }

  Matrix K = Matrix::Zero(m + k, m + k);
  K.topLeftCorner(m, m) = problem.R;
  K.topRightCorner(m, k) = GuA.transpose();
  K.bottomLeftCorner(k, m) = GuA;

  Eigen::JacobiSVD<Matrix> svd(K, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smax = sv(0), smin = sv(sv.size() - 1);
  if (!(smin > 0.0) || smax / smin > kKktConditionLimit) {
    throw Error(ErrorCode::kSingularKkt,
                "KKT block singular for active set " + active.to_string());
  }

  // Right-hand side as an affine map of z: rhs = [ -B'lambda ; b_A - Gx_A x ].
  const int dim = 2 * n + 1;
  Matrix rhs = Matrix::Zero(m + k, dim);
  rhs.block(0, n, m, n) = -problem.B.transpose();
  rhs.block(m, 0, k, n) = -GxA;
  rhs.block(m, 2 * n, k, 1) = bA;

  // Null-space solve with Gu_A' = [Y Z] [Rk; 0], u = Y wy + Z wz. The range
  // part sees x only, so with k = m the control carries no costate roundoff.
  Eigen::HouseholderQR<Matrix> qr(GuA.transpose());
  const Matrix Qf = qr.householderQ() * Matrix::Identity(m, m);
  const Matrix Y = Qf.leftCols(k), Z = Qf.rightCols(m - k);
  const Matrix Rk = qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  Matrix u_map = Y * Rk.transpose().triangularView<Eigen::Lower>().solve(rhs.bottomRows(k));
  if (m > k) {
    const Matrix RZ = Z.transpose() * problem.R * Z;
    u_map += Z * RZ.ldlt().solve(Z.transpose() * (rhs.topRows(m) - problem.R * u_map));
  }
  const Matrix muA = Rk.triangularView<Eigen::Upper>().solve(
      Y.transpose() * (rhs.topRows(m) - problem.R * u_map));

  ArcDynamics dyn;
  dyn.active = active;
  dyn.u_map = u_map;
  dyn.mu_map = Matrix::Zero(c, dim);
  for (int j = 0; j < k; ++j) dyn.mu_map.row(active.indices()[j]) = muA.row(j);

  dyn.generator = Matrix::Zero(dim, dim);
  // xdot = A x + B u
  dyn.generator.block(0, 0, n, n) = problem.A;
  dyn.generator.topRows(n) += problem.B * dyn.u_map;
  // lambdadot = -Q x - A' lambda - Gx_A' mu_A
  dyn.generator.block(n, 0, n, n) = -problem.Q;
  dyn.generator.block(n, n, n, n) = -problem.A.transpose();
  if (k > 0) dyn.generator.middleRows(n, n) -= GxA.transpose() * muA;
  return dyn;
}

Vector augment(const Vector& x, const Vector& lambda) {
  Vector z(x.size() + lambda.size() + 1);
  z << x, lambda, 1.0;
  return z;
}

double hamiltonian(const LtiOcProblem& problem, const Vector& x,
                   const Vector& lambda, const Vector& u, const Vector& mu) {
  return problem.running_cost(x, u) +
         lambda.dot(problem.A * x + problem.B * u) +
         mu.dot(problem.constraint_values(x, u));
}

PointState point_state(const LtiOcProblem& problem, const ArcDynamics& dyn,
                       double t, const Vector& z) {
  const int n = problem.n();
  PointState s;
  s.t = t;
  s.x = z.head(n);
  s.lambda = z.segment(n, n);
  s.u = dyn.control(z);
  s.mu = dyn.multipliers(z);
  s.g = problem.constraint_values(s.x, s.u);
  s.H = hamiltonian(problem, s.x, s.lambda, s.u, s.mu);
  return s;
}

PointState evaluate_arc(const LtiOcProblem& problem, const ArcDynamics& dyn,
                        const Vector& xl_start, double t_start, double t) {
  if (t < t_start) {
    throw Error(ErrorCode::kDegenerate, "evaluate_arc needs t >= t_start");
  }
  const int n = problem.n();
  const Vector z0 = augment(xl_start.head(n), xl_start.segment(n, n));
  if (t == t_start) return point_state(problem, dyn, t, z0);
  const Vector z = matrix_exponential(dyn.generator, t - t_start) * z0;
  return point_state(problem, dyn, t, z);
}

}  // namespace ctmp
