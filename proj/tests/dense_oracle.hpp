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

#ifndef CTMP_TESTS_DENSE_ORACLE_HPP
#define CTMP_TESTS_DENSE_ORACLE_HPP

// Fine-grid direct transcription solved by a sparse primal-dual interior
// point method. Shares no code with the library beyond the problem struct.

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>
#include <vector>

#include "ctmp/problem.hpp"

namespace ctmp::testing {

struct OracleSolution {
  bool converged = false;
  double cost = 0.0;
  double h = 0.0;
  std::vector<Vector> x;  // N + 1 nodes
  std::vector<Vector> u;  // N intervals
  // Multiplier density of row i at node k, from both interval ends.
  std::vector<Vector> mu;
  int iterations = 0;
};

// kBothEnds keeps every ZOH policy feasible when A = 0 (g is affine in t on
// each interval). kMidpoint tracks mixed state-input constraints to O(h^2).
enum class Placement { kBothEnds, kMidpoint };

// Piecewise-constant input over N intervals. Interval cost is integrated
// exactly.
inline OracleSolution dense_oracle(const LtiOcProblem& p, const Vector& x0,
                                   int N,
                                   Placement placement = Placement::kMidpoint) {
  using Sparse = Eigen::SparseMatrix<double>;
  using Trip = Eigen::Triplet<double>;
  const int n = p.n(), m = p.m(), c = p.c();
  const double h = p.T / N;

  Matrix C = Matrix::Zero(n + m, n + m);
  C.topLeftCorner(n, n) = p.A;
  C.topRightCorner(n, m) = p.B;
  const Matrix E = (C * h).exp();
  const Matrix Ad = E.topLeftCorner(n, n), Bd = E.topRightCorner(n, m);
  // Interval cost 1/2 [x;u]' W [x;u].
  Matrix L = Matrix::Zero(n + m, n + m);
  L.topLeftCorner(n, n) = p.Q;
  L.bottomRightCorner(m, m) = p.R;
  Matrix V = Matrix::Zero(2 * (n + m), 2 * (n + m));
  V.topLeftCorner(n + m, n + m) = -C.transpose();
  V.topRightCorner(n + m, n + m) = L;
  V.bottomRightCorner(n + m, n + m) = C;
  const Matrix F = (V * h).exp();
  Matrix W = F.bottomRightCorner(n + m, n + m).transpose() *
             F.topRightCorner(n + m, n + m);
  W = 0.5 * (W + W.transpose()).eval();

  // w = (x_0..x_N, u_0..u_{N-1})
  const int nx = n * (N + 1), nw = nx + m * N;
  auto xi = [&](int k) { return k * n; };
  auto ui = [&](int k) { return nx + k * m; };
  std::vector<Trip> th, te, tc;
  Vector f = Vector::Zero(nw);
  for (int k = 0; k < N; ++k) {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i) idx.push_back(xi(k) + i);
    for (int j = 0; j < m; ++j) idx.push_back(ui(k) + j);
    for (int a = 0; a < n + m; ++a)
      for (int b = 0; b < n + m; ++b)
        if (W(a, b) != 0.0) th.emplace_back(idx[a], idx[b], W(a, b));
  }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (p.P(a, b) != 0.0) th.emplace_back(xi(N) + a, xi(N) + b, p.P(a, b));
  const int ne = n * (N + 1);
  Vector e = Vector::Zero(ne);
  for (int i = 0; i < n; ++i) {
    te.emplace_back(i, i, 1.0);
    e(i) = x0(i);
  }
  for (int k = 0; k < N; ++k) {
    const int r = n * (k + 1);
    for (int i = 0; i < n; ++i) {
      te.emplace_back(r + i, xi(k + 1) + i, -1.0);
      for (int j = 0; j < n; ++j)
        if (Ad(i, j) != 0.0) te.emplace_back(r + i, xi(k) + j, Ad(i, j));
      for (int j = 0; j < m; ++j)
        if (Bd(i, j) != 0.0) te.emplace_back(r + i, ui(k) + j, Bd(i, j));
    }
  }
  // Midpoint state x(t_k + h/2) = Am x_k + Bm u_k.
  const Matrix Eh = (C * (0.5 * h)).exp();
  const Matrix Am = Eh.topLeftCorner(n, n), Bm = Eh.topRightCorner(n, m);
  const int per = placement == Placement::kBothEnds ? 2 : 1;
  const int ni = per * c * N;
  Vector d(ni);
  for (int k = 0; k < N; ++k) {
    for (int end = 0; end < per; ++end) {
      for (int i = 0; i < c; ++i) {
        const int r = (per * k + end) * c + i;
        Matrix gx = p.Gx.row(i), gu = p.Gu.row(i);
        if (placement == Placement::kMidpoint) {
          gu += gx * Bm;
          gx = gx * Am;
        }
        for (int j = 0; j < n; ++j)
          if (gx(0, j) != 0.0) tc.emplace_back(r, xi(k + end) + j, gx(0, j));
        for (int j = 0; j < m; ++j)
          if (gu(0, j) != 0.0) tc.emplace_back(r, ui(k) + j, gu(0, j));
        d(r) = p.b(i);
      }
    }
  }
  Sparse H(nw, nw), Eq(ne, nw), G(ni, nw);
  H.setFromTriplets(th.begin(), th.end());
  Eq.setFromTriplets(te.begin(), te.end());
  G.setFromTriplets(tc.begin(), tc.end());
  const Sparse Gt = G.transpose(), Et = Eq.transpose();

  Vector w = Vector::Zero(nw), y = Vector::Zero(ne);
  Vector s = Vector::Ones(ni), z = Vector::Ones(ni);
  Eigen::SparseLU<Sparse> lu;
  bool analyzed = false;
  OracleSolution out;
  out.h = h;
  for (int it = 0; it < 200; ++it) {
    const Vector rd = H * w + f + Et * y + Gt * z;
    const Vector re = Eq * w - e;
    const Vector ri = G * w + s - d;
    const double mu = s.dot(z) / ni;
    if (rd.lpNorm<Eigen::Infinity>() < 1e-10 &&
        re.lpNorm<Eigen::Infinity>() < 1e-11 &&
        ri.lpNorm<Eigen::Infinity>() < 1e-11 && mu < 1e-13) {
      out.converged = true;
      out.iterations = it;
      break;
    }
    const Vector D = z.cwiseQuotient(s);
    Sparse K(nw + ne, nw + ne);
    {
      Sparse top = H + Gt * D.asDiagonal() * G;
      std::vector<Trip> tk;
      for (int k = 0; k < top.outerSize(); ++k)
        for (Sparse::InnerIterator itr(top, k); itr; ++itr)
          tk.emplace_back(itr.row(), itr.col(), itr.value());
      for (int k = 0; k < Eq.outerSize(); ++k)
        for (Sparse::InnerIterator itr(Eq, k); itr; ++itr) {
          tk.emplace_back(nw + itr.row(), itr.col(), itr.value());
          tk.emplace_back(itr.col(), nw + itr.row(), itr.value());
        }
      for (int i = 0; i < ne; ++i) tk.emplace_back(nw + i, nw + i, -1e-14);
      K.setFromTriplets(tk.begin(), tk.end());
    }
    if (!analyzed) {
      lu.analyzePattern(K);
      analyzed = true;
    }
    lu.factorize(K);
    if (lu.info() != Eigen::Success) break;

    auto newton = [&](const Vector& rc, Vector& dw, Vector& dy, Vector& ds,
                      Vector& dz) {
      // z.ds + s.dz = -rc
      const Vector t = (-rc + z.cwiseProduct(ri)).cwiseQuotient(s);
      Vector rhs(nw + ne);
      rhs.head(nw) = -rd - Gt * t;
      rhs.tail(ne) = -re;
      const Vector sol = lu.solve(rhs);
      dw = sol.head(nw);
      dy = sol.tail(ne);
      ds = -ri - G * dw;
      dz = t + D.cwiseProduct(G * dw);
    };
    auto max_step = [](const Vector& v, const Vector& dv) {
      double a = 1.0;
      for (int i = 0; i < v.size(); ++i)
        if (dv(i) < 0.0) a = std::min(a, -v(i) / dv(i));
      return a;
    };
    Vector dw, dy, ds, dz;
    newton(s.cwiseProduct(z), dw, dy, ds, dz);
    const double a_aff = std::min(max_step(s, ds), max_step(z, dz));
    const double mu_aff =
        (s + a_aff * ds).dot(z + a_aff * dz) / ni;
    const double sigma = std::pow(mu_aff / mu, 3);
    const Vector rc = s.cwiseProduct(z) + ds.cwiseProduct(dz) -
                      Vector::Constant(ni, sigma * mu);
    newton(rc, dw, dy, ds, dz);
    const double a = std::min(1.0, 0.995 * std::min(max_step(s, ds),
                                                    max_step(z, dz)));
    w += a * dw;
    y += a * dy;
    s += a * ds;
    z += a * dz;
  }
  out.cost = 0.5 * w.dot(H * w);
  for (int k = 0; k <= N; ++k) out.x.push_back(w.segment(xi(k), n));
  for (int k = 0; k < N; ++k) out.u.push_back(w.segment(ui(k), m));
  // Interval multipliers spread over their intervals, averaged at nodes.
  for (int k = 0; k <= N; ++k) {
    Vector v = Vector::Zero(c);
    for (int i = 0; i < c; ++i) {
      double sum = 0.0, cnt = 0.0;
      for (int kk : {k - 1, k}) {
        if (kk < 0 || kk >= N) continue;
        for (int end = 0; end < per; ++end) sum += z((per * kk + end) * c + i);
        cnt += 1.0;
      }
      v(i) = sum / (cnt * h);
    }
    out.mu.push_back(v);
  }
  return out;
}

}  // namespace ctmp::testing

#endif  // CTMP_TESTS_DENSE_ORACLE_HPP
