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

#include "ctmp/qp.hpp"

#include <gtest/gtest.h>

#include <optional>
#include <random>

#include "ctmp/error.hpp"

namespace ctmp {
namespace {

Matrix random_spd(int n, std::mt19937& rng) {
  std::normal_distribution<double> nd;
  Matrix M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = nd(rng);
  return M * M.transpose() + 0.5 * Matrix::Identity(n, n);
}

// Tries every working set; the KKT point of a strictly convex QP is unique.
std::optional<Vector> brute_force(const QpProblem& qp) {
  const int n = qp.H.rows(), me = qp.Aeq.rows(), mi = qp.Ain.rows();
  for (int mask = 0; mask < (1 << mi); ++mask) {
    std::vector<int> rows;
    for (int i = 0; i < mi; ++i)
      if (mask & (1 << i)) rows.push_back(i);
    const int k = me + static_cast<int>(rows.size());
    if (k > n) continue;
    Matrix K = Matrix::Zero(n + k, n + k);
    Vector rhs = Vector::Zero(n + k);
    K.topLeftCorner(n, n) = qp.H;
    rhs.head(n) = -qp.f;
    for (int i = 0; i < me; ++i) {
      K.block(n + i, 0, 1, n) = qp.Aeq.row(i);
      K.block(0, n + i, n, 1) = qp.Aeq.row(i).transpose();
      rhs(n + i) = qp.beq(i);
    }
    for (std::size_t j = 0; j < rows.size(); ++j) {
      const int r = n + me + static_cast<int>(j);
      K.block(r, 0, 1, n) = qp.Ain.row(rows[j]);
      K.block(0, r, n, 1) = qp.Ain.row(rows[j]).transpose();
      rhs(r) = qp.bin(rows[j]);
    }
    Eigen::FullPivLU<Matrix> lu(K);
    if (lu.rank() < n + k) continue;
    const Vector sol = lu.solve(rhs);
    const Vector x = sol.head(n);
    if (((qp.Ain * x - qp.bin).array() > 1e-10).any()) continue;
    if ((sol.tail(rows.size()).array() < -1e-10).any()) continue;
    return x;
  }
  return std::nullopt;
}

QpProblem random_qp(int n, int me, int mi, std::mt19937& rng) {
  std::normal_distribution<double> nd;
  QpProblem qp;
  qp.H = random_spd(n, rng);
  qp.f = Vector::NullaryExpr(n, [&] { return 3.0 * nd(rng); });
  qp.Aeq = Matrix::NullaryExpr(me, n, [&] { return nd(rng); });
  qp.beq = Vector::NullaryExpr(me, [&] { return nd(rng); });
  qp.Ain = Matrix::NullaryExpr(mi, n, [&] { return nd(rng); });
  qp.bin = Vector::NullaryExpr(mi, [&] { return 0.3 + std::abs(nd(rng)); });
  return qp;
}

TEST(SolveQp, MatchesActiveSetEnumeration) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const QpProblem qp = random_qp(4, trial % 2, 9, rng);
    const auto ref = brute_force(qp);
    if (!ref) {
      EXPECT_THROW(solve_qp(qp), InfeasibleError);
      continue;
    }
    const QpResult r = solve_qp(qp);
    EXPECT_LT((r.x - *ref).lpNorm<Eigen::Infinity>(), 1e-9) << "trial " << trial;
    EXPECT_LT(r.kkt_residual(qp), 1e-9);
  }
}

TEST(SolveQp, UnconstrainedMinimum) {
  QpProblem qp;
  qp.H = Matrix::Identity(2, 2) * 2.0;
  qp.f = Vector::Constant(2, -2.0);
  qp.Ain = Matrix::Zero(0, 2);
  qp.bin = Vector::Zero(0);
  const QpResult r = solve_qp(qp);
  EXPECT_NEAR(r.x(0), 1.0, 1e-15);
  EXPECT_NEAR(r.objective, -2.0, 1e-14);
  EXPECT_TRUE(r.active.empty());
}

TEST(SolveQp, ReportsWeaklyActiveRow) {
  // Unconstrained minimum sits exactly on x0 <= 0; x0 >= 1 is violated.
  QpProblem qp;
  qp.H = Matrix::Identity(2, 2);
  qp.f = Vector::Zero(2);
  qp.Ain = Matrix(2, 2);
  qp.Ain << 0, -1, 1, 0;
  qp.bin = Vector(2);
  qp.bin << -1, 0;
  const QpResult r = solve_qp(qp);
  EXPECT_NEAR(r.x(1), 1.0, 1e-14);
  EXPECT_EQ(r.active, std::vector<int>{0});
  EXPECT_NEAR(r.lambda_in(1), 0.0, 1e-14);
}

TEST(SolveQp, DetectsInfeasibility) {
  QpProblem qp;
  qp.H = Matrix::Identity(1, 1);
  qp.f = Vector::Zero(1);
  qp.Ain = Matrix(2, 1);
  qp.Ain << 1, -1;
  qp.bin = Vector(2);
  qp.bin << -1, -1;  // x <= -1 and x >= 1
  EXPECT_THROW(solve_qp(qp), InfeasibleError);
}

TEST(SolveQp, InconsistentEqualities) {
  QpProblem qp;
  qp.H = Matrix::Identity(2, 2);
  qp.f = Vector::Zero(2);
  qp.Aeq = Matrix(2, 2);
  qp.Aeq << 1, 1, 2, 2;
  qp.beq = Vector(2);
  qp.beq << 1, 3;
  qp.Ain = Matrix::Zero(0, 2);
  qp.bin = Vector::Zero(0);
  EXPECT_THROW(solve_qp(qp), InfeasibleError);
}

TEST(SolveQp, RejectsIndefiniteHessian) {
  QpProblem qp;
  qp.H = Matrix::Identity(2, 2);
  qp.H(1, 1) = -1.0;
  qp.f = Vector::Zero(2);
  qp.Ain = Matrix::Zero(0, 2);
  qp.bin = Vector::Zero(0);
  try {
    solve_qp(qp);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSingularKkt);
  }
}

TEST(SolveQp, DuplicateRowsDoNotBreakTheFactorization) {
  QpProblem qp;
  qp.H = Matrix::Identity(2, 2);
  qp.f = Vector(2);
  qp.f << -2, -2;
  qp.Ain = Matrix(3, 2);
  qp.Ain << 1, 1, 1, 1, 2, 2;
  qp.bin = Vector(3);
  qp.bin << 1, 1, 2;
  const QpResult r = solve_qp(qp);
  EXPECT_NEAR(r.x(0), 0.5, 1e-12);
  EXPECT_NEAR(r.x(1), 0.5, 1e-12);
  EXPECT_LT(r.kkt_residual(qp), 1e-9);
}

}  // namespace
}  // namespace ctmp
